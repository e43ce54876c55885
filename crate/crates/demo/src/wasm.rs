use wasm_bindgen::prelude::*;

use crate::Session;

fn js<T: serde::Serialize>(r: tsuq::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = Session)]
pub struct JsSession(Session);

#[wasm_bindgen(js_class = Session)]
impl JsSession {
    #[wasm_bindgen(constructor)]
    pub fn new() -> JsSession {
        JsSession(Session::new())
    }

    /// JSON `{architecture, method, y, mean, std, metrics, final_loss}`.
    pub fn forecast(
        &mut self,
        architecture: &str,
        method: &str,
        epochs: u32,
        seed: u32,
    ) -> Result<String, JsError> {
        js(self
            .0
            .forecast(architecture, method, epochs as usize, seed as u64))
    }

    /// JSON `{scale, levels, coverage, ece}`.
    pub fn reliability(&self, scale: f64) -> Result<String, JsError> {
        js(self.0.reliability(scale))
    }

    /// JSON `{x, mae, retained, label}`.
    #[wasm_bindgen(js_name = confError)]
    pub fn conf_error(&self) -> Result<String, JsError> {
        js(self.0.conf_error())
    }
}

impl Default for JsSession {
    fn default() -> Self {
        Self::new()
    }
}

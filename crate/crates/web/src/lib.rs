//! Browser bindings for the qudit simulator. The demo page in `www/`
//! drives three operations: trajectory plotting, structure-constant table
//! dumps, and the real-vs-complex validation sweep. All heavy lifting
//! lives in [`api`], which compiles and tests natively; the exports below
//! only shuttle JSON strings across the wasm boundary.

pub mod api;

use wasm_bindgen::prelude::*;

/// Runs a simulation; takes and returns JSON (see `api::simulate`).
#[wasm_bindgen]
pub fn demo_simulate(request_json: &str) -> Result<String, JsValue> {
    api::simulate(request_json).map_err(|e| JsValue::from_str(&e))
}

/// Structure-constant tables for one spin as JSON.
#[wasm_bindgen]
pub fn demo_constants(spin: &str) -> Result<String, JsValue> {
    api::constants_table(spin).map_err(|e| JsValue::from_str(&e))
}

/// Cross-checks the real evolution against the complex reference.
#[wasm_bindgen]
pub fn demo_validate(request_json: &str) -> Result<String, JsValue> {
    api::validate(request_json).map_err(|e| JsValue::from_str(&e))
}

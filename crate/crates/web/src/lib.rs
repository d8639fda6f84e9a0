//! WebAssembly bindings for the static demo page in `www/`.

use mee_core::data::{fresh_inputs, generate, GeneratorSpec, Mode, Truth};
use mee_core::density::{v_profile, ErrorDensity, NoiseSpec, SubbotinDensity};
use mee_core::harness::test_mse;
use mee_core::network::{Architecture, WeightBound};
use mee_core::train::{train_least_squares, train_mee, TrainConfig};
use wasm_bindgen::prelude::*;

fn js_err(e: mee_core::MeeError) -> JsError {
    JsError::new(&e.to_string())
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Subbotin density `f_r` on an even grid over `[lo, hi]`.
#[wasm_bindgen]
pub fn density_curve(r: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let d = SubbotinDensity::new(r).map_err(js_err)?;
    Ok(grid(lo, hi, points).into_iter().map(|u| d.pdf(u)).collect())
}

/// `V(s) − V(0)` where `V(s) = E[−log f(ξ + s)]`, on an even grid over `[lo, hi]`.
#[wasm_bindgen]
pub fn entropy_profile(r: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let d = SubbotinDensity::new(r).map_err(js_err)?;
    let v0 = v_profile(&d, 0.0).map_err(js_err)?;
    grid(lo, hi, points)
        .into_iter()
        .map(|s| v_profile(&d, s).map(|v| v - v0).map_err(js_err))
        .collect()
}

/// MEE with the true noise density against least squares on one sample.
#[wasm_bindgen]
pub struct FitResult {
    data_x: Vec<f64>,
    data_y: Vec<f64>,
    grid: Vec<f64>,
    truth: Vec<f64>,
    mee: Vec<f64>,
    ls: Vec<f64>,
    mse_mee: f64,
    mse_ls: f64,
}

#[wasm_bindgen]
impl FitResult {
    #[wasm_bindgen(getter)]
    pub fn data_x(&self) -> Vec<f64> {
        self.data_x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn data_y(&self) -> Vec<f64> {
        self.data_y.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mee(&self) -> Vec<f64> {
        self.mee.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ls(&self) -> Vec<f64> {
        self.ls.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mse_mee(&self) -> f64 {
        self.mse_mee
    }
    #[wasm_bindgen(getter)]
    pub fn mse_ls(&self) -> f64 {
        self.mse_ls
    }
}

/// Fits a one-input tanh bump observed under noise of shape `r`, or under
/// 5% scale-10 contamination when `contaminated` is set (the MEE loss then
/// uses the Laplace density).
#[wasm_bindgen]
pub fn fit_demo(r: f64, contaminated: bool, n: usize, epochs: usize, seed: u64) -> Result<FitResult, JsError> {
    let truth = Truth::TanhBump {
        amplitude: 1.0,
        half_width: 1.0,
        scale: 0.5,
    };
    let (noise, loss) = if contaminated {
        (
            NoiseSpec::Contaminated {
                outlier_prob: 0.05,
                outlier_scale: 10.0,
            },
            NoiseSpec::Subbotin { r: 1.0 },
        )
    } else {
        (NoiseSpec::Subbotin { r }, NoiseSpec::Subbotin { r })
    };
    let spec = GeneratorSpec::new(truth.clone(), 1, Mode::Exogenous, noise, seed);
    let data = generate(&spec, n).map_err(js_err)?;
    let arch = Architecture::uniform(1, 2, 12, WeightBound::new(100.0).map_err(js_err)?, 5.0, None).map_err(js_err)?;
    let cfg = TrainConfig {
        epochs,
        seed,
        record_curve: false,
        ..TrainConfig::default()
    };
    let density: Box<dyn ErrorDensity> = loss.build().map_err(js_err)?;
    let mee = train_mee(&data, &arch, density.as_ref(), &cfg).map_err(js_err)?.net;
    let ls = train_least_squares(&data, &arch, &cfg).map_err(js_err)?.net;
    let eval = fresh_inputs(&spec, 2000, seed.wrapping_add(1)).map_err(js_err)?;
    let xs = grid(-4.0, 4.0, 161);
    Ok(FitResult {
        data_x: data.inputs().to_vec(),
        data_y: data.outputs().to_vec(),
        truth: xs.iter().map(|x| truth.eval(&[*x])).collect(),
        mee: xs.iter().map(|x| mee.predict(&[*x])).collect(),
        ls: xs.iter().map(|x| ls.predict(&[*x])).collect(),
        grid: xs,
        mse_mee: test_mse(&mee, &truth, &eval, 1),
        mse_ls: test_mse(&ls, &truth, &eval, 1),
    })
}

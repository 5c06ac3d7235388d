//! Constant-velocity Kalman filter over bounding-box state.
//!
//! State vector: (cx, cy, s, r, vcx, vcy, vs, vr) where s is box area and
//! r the aspect ratio w/h. Position components are observed; velocities are
//! estimated. One predict per frame, one update per assigned detection.

use nalgebra::{SMatrix, SVector};
use serde::Deserialize;
use thiserror::Error;

use crate::geometry::BoundingBox;

pub type StateVector = SVector<f64, 8>;
pub type StateMatrix = SMatrix<f64, 8, 8>;
pub type Observation = SVector<f64, 4>;
pub type ObsNoise = SVector<f64, 4>;

const AREA_FLOOR: f64 = 1e-6;
const RATIO_FLOOR: f64 = 1e-3;
const RATIO_CEIL: f64 = 1e3;

#[derive(Debug, Error)]
pub enum KalmanError {
    #[error("degenerate detection box (w={w}, h={h})")]
    DegenerateBox { w: f64, h: f64 },
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
}

/// Noise scales. Measurement and process stds scale with the current box
/// height proxy so the filter behaves consistently across target sizes.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Measurement/process position std as a fraction of box height.
    pub std_weight_position: f64,
    /// Process velocity std as a fraction of box height.
    pub std_weight_velocity: f64,
    /// Aspect-ratio measurement std (dimensionless).
    pub ratio_std: f64,
    /// Aspect-ratio-velocity process std.
    pub ratio_velocity_std: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            std_weight_position: 1.0 / 20.0,
            std_weight_velocity: 1.0 / 160.0,
            ratio_std: 0.1,
            ratio_velocity_std: 0.01,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.std_weight_position,
            self.std_weight_velocity,
            self.ratio_std,
            self.ratio_velocity_std,
        ];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err("all noise scales must be finite and > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionState {
    pub mean: StateVector,
    pub covariance: StateMatrix,
}

impl MotionState {
    /// Height proxy sqrt(s/r), floored so noise scales stay positive.
    fn height_proxy(&self) -> f64 {
        let s = self.mean[2].max(AREA_FLOOR);
        let r = self.mean[3].clamp(RATIO_FLOOR, RATIO_CEIL);
        (s / r).sqrt().max(1.0)
    }

    fn area_proxy(&self) -> f64 {
        self.mean[2].max(1.0)
    }
}

fn observation_of(b: &BoundingBox) -> Observation {
    let (cx, cy) = b.center();
    Observation::new(cx, cy, b.area(), b.w / b.h)
}

/// Constant-velocity transition, dt = 1 frame.
fn transition() -> StateMatrix {
    let mut f = StateMatrix::identity();
    for i in 0..4 {
        f[(i, i + 4)] = 1.0;
    }
    f
}

pub fn init_state(b: &BoundingBox, cfg: &NoiseConfig) -> Result<MotionState, KalmanError> {
    if b.w <= 0.0 || b.h <= 0.0 {
        return Err(KalmanError::DegenerateBox { w: b.w, h: b.h });
    }
    let obs = observation_of(b);
    let mut mean = StateVector::zeros();
    for i in 0..4 {
        mean[i] = obs[i];
    }
    let h = b.h.max(1.0);
    let s = b.area().max(1.0);
    let wp = cfg.std_weight_position;
    let wv = cfg.std_weight_velocity;
    let mut cov = StateMatrix::zeros();
    let stds = [
        2.0 * wp * h,
        2.0 * wp * h,
        2.0 * wp * s,
        cfg.ratio_std,
        // velocities are unobserved at init: inflated
        10.0 * wv * h,
        10.0 * wv * h,
        10.0 * wv * s,
        10.0 * cfg.ratio_velocity_std,
    ];
    for (i, sd) in stds.iter().enumerate() {
        cov[(i, i)] = sd * sd;
    }
    Ok(MotionState { mean, covariance: cov })
}

fn process_noise(st: &MotionState, cfg: &NoiseConfig) -> StateMatrix {
    let h = st.height_proxy();
    let s = st.area_proxy();
    let wp = cfg.std_weight_position;
    let wv = cfg.std_weight_velocity;
    let stds = [
        wp * h,
        wp * h,
        wp * s,
        cfg.ratio_std * 0.1,
        wv * h,
        wv * h,
        wv * s,
        cfg.ratio_velocity_std,
    ];
    let mut q = StateMatrix::zeros();
    for (i, sd) in stds.iter().enumerate() {
        q[(i, i)] = sd * sd;
    }
    q
}

fn measurement_noise(st: &MotionState, cfg: &NoiseConfig) -> ObsNoise {
    let h = st.height_proxy();
    let s = st.area_proxy();
    let wp = cfg.std_weight_position;
    ObsNoise::new(
        (wp * h).powi(2),
        (wp * h).powi(2),
        (wp * s).powi(2),
        cfg.ratio_std.powi(2),
    )
}

/// Transition with explicit process noise. Exposed for oracle comparison.
pub fn predict_with(st: &MotionState, q: &StateMatrix) -> MotionState {
    let f = transition();
    let mut mean = f * st.mean;
    mean[2] = mean[2].max(0.0); // predicted area never negative
    let covariance = f * st.covariance * f.transpose() + q;
    MotionState { mean, covariance }
}

pub fn predict(st: &MotionState, cfg: &NoiseConfig) -> MotionState {
    predict_with(st, &process_noise(st, cfg))
}

/// Kalman correction against an explicit diagonal measurement noise.
/// Joseph-form covariance update. Exposed for oracle comparison.
pub fn correct(
    st: &MotionState,
    obs: &Observation,
    r_diag: &ObsNoise,
) -> Result<MotionState, KalmanError> {
    // H selects (cx, cy, s, r)
    let mut h = SMatrix::<f64, 4, 8>::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    let r = SMatrix::<f64, 4, 4>::from_diagonal(r_diag);
    let s_innov = h * st.covariance * h.transpose() + r;
    let chol = s_innov.cholesky().ok_or(KalmanError::SingularInnovation)?;
    // K = P Hᵀ S⁻¹  solved as  Kᵀ = S⁻¹ H P
    let k_t = chol.solve(&(h * st.covariance));
    let k = k_t.transpose();
    let innovation = obs - h * st.mean;
    let mut mean = st.mean + k * innovation;
    mean[2] = mean[2].max(0.0);
    mean[3] = mean[3].clamp(RATIO_FLOOR, RATIO_CEIL);
    let i_kh = StateMatrix::identity() - k * h;
    let covariance = i_kh * st.covariance * i_kh.transpose() + k * r * k.transpose();
    Ok(MotionState { mean, covariance })
}

pub fn update(
    st: &MotionState,
    b: &BoundingBox,
    cfg: &NoiseConfig,
) -> Result<MotionState, KalmanError> {
    if b.w <= 0.0 || b.h <= 0.0 {
        return Err(KalmanError::DegenerateBox { w: b.w, h: b.h });
    }
    correct(st, &observation_of(b), &measurement_noise(st, cfg))
}

/// Inverse of the state encoding: w = sqrt(s·r), h = sqrt(s/r), with s and r
/// clamped to keep the conversion total.
pub fn state_to_box(st: &MotionState) -> BoundingBox {
    let s = st.mean[2].max(AREA_FLOOR);
    let r = st.mean[3].clamp(RATIO_FLOOR, RATIO_CEIL);
    let w = (s * r).sqrt();
    let h = (s / r).sqrt();
    BoundingBox::new(st.mean[0] - w / 2.0, st.mean[1] - h / 2.0, w, h)
}

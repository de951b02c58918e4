//! Continuous-time dynamics: right-hand sides for the three model variants,
//! a fixed-step explicit integrator, and the energy of the frozen-weight
//! fast dynamics.
//!
//! The three variants are
//!
//! * the input-modulated fast dynamics  xdot = -x + W(alpha) Psi(x) with
//!   frozen saliency weights alpha,
//! * the coupled two-timescale retrieval-reasoning system
//!   tau_x xdot = -x + M diag(alpha) M^T Psi(x),
//!   tau_z zdot = -z + (kappa/sqrt(N)) A M^T Psi(x),  alpha = z (.) z,
//! * the one-timescale transition-matrix baseline  xdot = -x + kappa Q Psi(x).
//!
//! Integration is explicit fixed-step (Euler or classic RK4). Adaptive
//! stepping is deliberately avoided: the HardTanh kinks make local error
//! estimators unreliable, and fixed steps keep escape-time measurements
//! deterministic and comparable across runs.

use ndarray::{s, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::memory::{MemorySet, ReasoningMatrix, SaliencyWeights};

/// Explicit integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

/// Fixed-step integration settings. States are recorded every
/// `stride` steps (stride 1 records every step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub stride: usize,
}

impl IntegrationOptions {
    pub fn new(dt: f64, t_end: f64, method: Method, stride: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        if t_end < dt {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be at least dt={dt}, got {t_end}"),
            });
        }
        if stride == 0 {
            return Err(Error::InvalidParameter {
                name: "stride",
                reason: "must be at least 1".into(),
            });
        }
        Ok(IntegrationOptions {
            dt,
            t_end,
            method,
            stride,
        })
    }
}

/// Snapshot of the parameters a trajectory was produced with; carried by the
/// trajectory so that analysis code can interpret it without extra context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    pub dt: f64,
    pub stride: usize,
    pub method: Method,
    /// Activation used by the run (and by overlap instrumentation).
    pub act: Activation,
    /// Slow timescale; escape times are reported in units of tau_z.
    /// 1.0 for one-timescale runs.
    pub tau_z: f64,
}

/// Time-stamped states of one simulation run. `z_states` is empty for
/// one-timescale runs; otherwise it parallels `x_states`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x_states: Vec<Array1<f64>>,
    pub z_states: Vec<Array1<f64>>,
    pub params: TrajectoryParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn end_x(&self) -> Option<&Array1<f64>> {
        self.x_states.last()
    }

    pub fn end_z(&self) -> Option<&Array1<f64>> {
        self.z_states.last()
    }
}

/// Frozen-weight fast dynamics: -x + W(alpha) Psi(x), evaluated through the
/// pattern matrix as (1/N) Xi (alpha (.) Xi^T Psi(x)) so that the
/// equilibrium identities hold to machine precision in Exact mode.
pub fn idp_rhs(
    x: &Array1<f64>,
    alpha: &Array1<f64>,
    mem: &MemorySet,
    act: Activation,
) -> Result<Array1<f64>> {
    if x.len() != mem.n() {
        return Err(Error::DimensionMismatch {
            what: "x",
            expected: mem.n(),
            got: x.len(),
        });
    }
    if alpha.len() != mem.p() {
        return Err(Error::DimensionMismatch {
            what: "alpha",
            expected: mem.p(),
            got: alpha.len(),
        });
    }
    let psi = act.apply(x);
    let v = mem.patterns().t().dot(&psi);
    let drive = mem.patterns().dot(&(alpha * &v)) / mem.n() as f64;
    Ok(drive - x)
}

/// Parameters of the coupled two-timescale system.
#[derive(Debug, Clone)]
pub struct SystemParams {
    pub kappa: f64,
    pub tau_x: f64,
    pub tau_z: f64,
    pub mem: MemorySet,
    pub reasoning: ReasoningMatrix,
    pub act: Activation,
}

impl SystemParams {
    pub fn new(
        kappa: f64,
        tau_x: f64,
        tau_z: f64,
        mem: MemorySet,
        reasoning: ReasoningMatrix,
        act: Activation,
    ) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be positive, got {kappa}"),
            });
        }
        if !(tau_x > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau_x",
                reason: format!("must be positive, got {tau_x}"),
            });
        }
        if !(tau_z > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau_z",
                reason: format!("must be positive, got {tau_z}"),
            });
        }
        if reasoning.size() != mem.p() {
            return Err(Error::DimensionMismatch {
                what: "reasoning matrix",
                expected: mem.p(),
                got: reasoning.size(),
            });
        }
        Ok(SystemParams {
            kappa,
            tau_x,
            tau_z,
            mem,
            reasoning,
            act,
        })
    }

    /// tau_x / tau_z; the reduced-map analysis assumes this is small.
    pub fn timescale_ratio(&self) -> f64 {
        self.tau_x / self.tau_z
    }
}

/// Coupled two-timescale right-hand side, returning (dx/dt, dz/dt) including
/// the 1/tau factors. The saliency weights alpha = z (.) z are computed
/// internally.
pub fn two_timescale_rhs(
    x: &Array1<f64>,
    z: &Array1<f64>,
    params: &SystemParams,
) -> Result<(Array1<f64>, Array1<f64>)> {
    if z.len() != params.mem.p() {
        return Err(Error::DimensionMismatch {
            what: "z",
            expected: params.mem.p(),
            got: z.len(),
        });
    }
    let alpha = SaliencyWeights::new(z.clone()).alpha();
    let dx = idp_rhs(x, &alpha, &params.mem, params.act)? / params.tau_x;
    let psi = params.act.apply(x);
    let v = params.mem.patterns().t().dot(&psi);
    // (kappa/sqrt(N)) A M^T Psi(x) = (kappa/N) A Xi^T Psi(x)
    let slow_drive =
        params.reasoning.as_array().dot(&v) * (params.kappa / params.mem.n() as f64);
    let dz = (slow_drive - z) / params.tau_z;
    Ok((dx, dz))
}

/// One-timescale transition-matrix baseline: -x + kappa Q Psi(x).
pub fn kleinfeld_rhs(
    x: &Array1<f64>,
    kappa: f64,
    q: &Array2<f64>,
    act: Activation,
) -> Result<Array1<f64>> {
    if x.len() != q.nrows() || q.nrows() != q.ncols() {
        return Err(Error::DimensionMismatch {
            what: "x / Q",
            expected: q.nrows(),
            got: x.len(),
        });
    }
    let psi = act.apply(x);
    Ok(q.dot(&psi) * kappa - x)
}

/// Energy of the frozen-weight fast dynamics:
/// E = -1/2 Psi(x)^T W(alpha) Psi(x) + x^T Psi(x) - sum_i int_0^{x_i} psi(s) ds.
///
/// Along trajectories of `idp_rhs` with fixed alpha the energy is
/// non-increasing.
pub fn energy(
    x: &Array1<f64>,
    alpha: &Array1<f64>,
    mem: &MemorySet,
    act: Activation,
) -> Result<f64> {
    if x.len() != mem.n() {
        return Err(Error::DimensionMismatch {
            what: "x",
            expected: mem.n(),
            got: x.len(),
        });
    }
    if alpha.len() != mem.p() {
        return Err(Error::DimensionMismatch {
            what: "alpha",
            expected: mem.p(),
            got: alpha.len(),
        });
    }
    let psi = act.apply(x);
    let v = mem.patterns().t().dot(&psi);
    let quad: f64 = alpha
        .iter()
        .zip(v.iter())
        .map(|(&a, &vi)| a * vi * vi)
        .sum::<f64>()
        / mem.n() as f64;
    let cross = x.dot(&psi);
    let integral: f64 = x.iter().map(|&s| act.antiderivative(s)).sum();
    Ok(-0.5 * quad + cross - integral)
}

fn check_finite(y: &Array1<f64>, t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// Fixed-step explicit integration of y' = rhs(y) from y0.
///
/// Records the initial state and every `stride`-th step thereafter, with
/// times computed as step * dt (so recorded times are uniformly spaced when
/// stride divides the step count). Integration aborts with the failure time
/// if the state leaves the finite range.
pub fn integrate<F>(rhs: F, y0: &Array1<f64>, opts: &IntegrationOptions) -> Result<Trajectory>
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    let mut rhs_into = |y: &Array1<f64>, out: &mut Array1<f64>| out.assign(&rhs(y));
    let (times, states) = integrate_core(&mut rhs_into, y0, opts)?;
    Ok(Trajectory {
        times,
        x_states: states,
        z_states: Vec::new(),
        params: TrajectoryParams {
            dt: opts.dt,
            stride: opts.stride,
            method: opts.method,
            act: Activation::Identity,
            tau_z: 1.0,
        },
    })
}

/// Integration engine over write-into derivative closures; all stage
/// buffers are reused across steps.
fn integrate_core<F>(
    rhs: &mut F,
    y0: &Array1<f64>,
    opts: &IntegrationOptions,
) -> Result<(Vec<f64>, Vec<Array1<f64>>)>
where
    F: FnMut(&Array1<f64>, &mut Array1<f64>),
{
    let n_steps = (opts.t_end / opts.dt).round().max(1.0) as usize;
    let dim = y0.len();
    let dt = opts.dt;
    let mut y = y0.clone();
    check_finite(&y, 0.0)?;

    let mut times = Vec::with_capacity(n_steps / opts.stride + 1);
    let mut states = Vec::with_capacity(n_steps / opts.stride + 1);
    times.push(0.0);
    states.push(y.clone());

    let mut k1 = Array1::zeros(dim);
    let mut k2 = Array1::zeros(dim);
    let mut k3 = Array1::zeros(dim);
    let mut k4 = Array1::zeros(dim);
    let mut stage = Array1::zeros(dim);

    fn shifted(stage: &mut Array1<f64>, y: &Array1<f64>, k: &Array1<f64>, c: f64) {
        for ((s, &yv), &kv) in stage.iter_mut().zip(y.iter()).zip(k.iter()) {
            *s = yv + c * kv;
        }
    }

    for k in 0..n_steps {
        match opts.method {
            Method::Euler => {
                rhs(&y, &mut k1);
                for (yv, &kv) in y.iter_mut().zip(k1.iter()) {
                    *yv += dt * kv;
                }
            }
            Method::Rk4 => {
                rhs(&y, &mut k1);
                shifted(&mut stage, &y, &k1, 0.5 * dt);
                rhs(&stage, &mut k2);
                shifted(&mut stage, &y, &k2, 0.5 * dt);
                rhs(&stage, &mut k3);
                shifted(&mut stage, &y, &k3, dt);
                rhs(&stage, &mut k4);
                let sixth = dt / 6.0;
                for i in 0..dim {
                    y[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t = (k + 1) as f64 * dt;
        check_finite(&y, t)?;
        if (k + 1) % opts.stride == 0 {
            times.push(t);
            states.push(y.clone());
        }
    }
    Ok((times, states))
}

/// Row-major pattern matrix kernel for the integration hot path; the
/// simulators' derivative closures run on plain slices to keep per-step
/// cost at the flop count.
struct PatternKernel<'a> {
    pat: &'a [f64],
    n: usize,
    p: usize,
}

impl<'a> PatternKernel<'a> {
    fn new(mem: &'a MemorySet) -> Self {
        PatternKernel {
            pat: mem
                .patterns()
                .as_slice()
                .expect("pattern matrix is standard layout"),
            n: mem.n(),
            p: mem.p(),
        }
    }

    /// v = Xi^T psi.
    fn project(&self, psi: &[f64], v: &mut [f64]) {
        v.fill(0.0);
        for i in 0..self.n {
            let s = psi[i];
            let row = &self.pat[i * self.p..(i + 1) * self.p];
            for (vm, &r) in v.iter_mut().zip(row) {
                *vm += r * s;
            }
        }
    }

    /// drive = scale * Xi w.
    fn expand(&self, w: &[f64], scale: f64, drive: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.pat[i * self.p..(i + 1) * self.p];
            let mut acc = 0.0;
            for (&r, &wm) in row.iter().zip(w) {
                acc += r * wm;
            }
            drive[i] = scale * acc;
        }
    }
}

fn apply_activation(act: Activation, x: &[f64], psi: &mut [f64]) {
    match act {
        Activation::HardTanh => {
            for (o, &s) in psi.iter_mut().zip(x) {
                *o = s.clamp(-1.0, 1.0);
            }
        }
        Activation::Identity => psi.copy_from_slice(x),
    }
}

/// Default background cue amplitude for coupled reproduction runs.
///
/// With exactly orthogonal memories, the span of each stored pattern is an
/// exactly invariant subspace of the fast flow: once a retrieved memory
/// loses stability, the state has no component along the next pattern to
/// amplify, and the activity decays to the origin instead of transitioning.
/// (Orthogonality in expectation provides such components through pattern
/// cross-talk.) A constant cue b * sum_mu xi^mu added to the feature layer
/// restores the generic seed deterministically; the induced transition lag
/// scales with tau_x * ln(1/b) and is negligible against the escape-time
/// tolerances at this amplitude. Set to 0.0 to integrate the bare system.
pub const DEFAULT_BACKGROUND_CUE: f64 = 1e-6;

/// Simulate the frozen-weight fast dynamics from x0.
pub fn simulate_idp(
    mem: &MemorySet,
    alpha: &Array1<f64>,
    act: Activation,
    x0: &Array1<f64>,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    // Surface dimension errors before integration starts.
    idp_rhs(x0, alpha, mem, act)?;
    let kernel = PatternKernel::new(mem);
    let (n, p) = (kernel.n, kernel.p);
    let inv_n = 1.0 / n as f64;
    let alpha = alpha.to_vec();
    let mut psi = vec![0.0; n];
    let mut v = vec![0.0; p];
    let mut weighted = vec![0.0; p];
    let mut drive = vec![0.0; n];

    let mut rhs = |y: &Array1<f64>, out: &mut Array1<f64>| {
        let y = y.as_slice().expect("contiguous state");
        let out = out.as_slice_mut().expect("contiguous state");
        apply_activation(act, y, &mut psi);
        kernel.project(&psi, &mut v);
        for mu in 0..p {
            weighted[mu] = alpha[mu] * v[mu];
        }
        kernel.expand(&weighted, inv_n, &mut drive);
        for i in 0..n {
            out[i] = drive[i] - y[i];
        }
    };
    let (times, states) = integrate_core(&mut rhs, x0, opts)?;
    Ok(Trajectory {
        times,
        x_states: states,
        z_states: Vec::new(),
        params: TrajectoryParams {
            dt: opts.dt,
            stride: opts.stride,
            method: opts.method,
            act,
            tau_z: 1.0,
        },
    })
}

/// Simulate the one-timescale transition-matrix baseline from x0.
pub fn simulate_kleinfeld(
    mem: &MemorySet,
    reasoning: &ReasoningMatrix,
    kappa: f64,
    act: Activation,
    x0: &Array1<f64>,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    let q = crate::memory::kleinfeld_matrix(mem, reasoning)?;
    kleinfeld_rhs(x0, kappa, &q, act)?;
    let n = mem.n();
    let q_rows = q.as_slice().expect("contiguous matrix");
    let mut psi = vec![0.0; n];

    let mut rhs = |y: &Array1<f64>, out: &mut Array1<f64>| {
        let y = y.as_slice().expect("contiguous state");
        let out = out.as_slice_mut().expect("contiguous state");
        apply_activation(act, y, &mut psi);
        for i in 0..n {
            let row = &q_rows[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (&qij, &pj) in row.iter().zip(&psi) {
                acc += qij * pj;
            }
            out[i] = kappa * acc - y[i];
        }
    };
    let (times, states) = integrate_core(&mut rhs, x0, opts)?;
    Ok(Trajectory {
        times,
        x_states: states,
        z_states: Vec::new(),
        params: TrajectoryParams {
            dt: opts.dt,
            stride: opts.stride,
            method: opts.method,
            act,
            tau_z: 1.0,
        },
    })
}

/// Simulate the coupled two-timescale system from (x0, z0).
///
/// `background_cue` scales a constant drive cue * sum_mu xi^mu added to the
/// feature layer; see [`DEFAULT_BACKGROUND_CUE`] for why exact-orthogonality
/// runs need it and what it costs.
pub fn simulate_two_timescale(
    params: &SystemParams,
    x0: &Array1<f64>,
    z0: &Array1<f64>,
    opts: &IntegrationOptions,
    background_cue: f64,
) -> Result<Trajectory> {
    two_timescale_rhs(x0, z0, params)?;
    let kernel = PatternKernel::new(&params.mem);
    let (n, p) = (kernel.n, kernel.p);
    let a_rows = params
        .reasoning
        .as_array()
        .as_slice()
        .expect("contiguous matrix");
    let act = params.act;
    let inv_n = 1.0 / n as f64;
    let kappa_over_n = params.kappa / n as f64;
    let (tau_x, tau_z) = (params.tau_x, params.tau_z);
    let cue: Vec<f64> = params
        .mem
        .patterns()
        .sum_axis(ndarray::Axis(1))
        .mapv(|v| v * background_cue)
        .to_vec();

    let mut psi = vec![0.0; n];
    let mut v = vec![0.0; p];
    let mut weighted = vec![0.0; p];
    let mut drive = vec![0.0; n];

    let mut rhs = |y: &Array1<f64>, out: &mut Array1<f64>| {
        let y = y.as_slice().expect("contiguous state");
        let out = out.as_slice_mut().expect("contiguous state");
        let (x, z) = y.split_at(n);
        apply_activation(act, x, &mut psi);
        kernel.project(&psi, &mut v);
        for mu in 0..p {
            weighted[mu] = z[mu] * z[mu] * v[mu];
        }
        kernel.expand(&weighted, inv_n, &mut drive);
        for i in 0..n {
            out[i] = (drive[i] - x[i] + cue[i]) / tau_x;
        }
        for nu in 0..p {
            let row = &a_rows[nu * p..(nu + 1) * p];
            let mut acc = 0.0;
            for (&anm, &vm) in row.iter().zip(&v) {
                acc += anm * vm;
            }
            out[n + nu] = (kappa_over_n * acc - z[nu]) / tau_z;
        }
    };

    let mut y0 = Array1::zeros(n + p);
    y0.slice_mut(s![..n]).assign(x0);
    y0.slice_mut(s![n..]).assign(z0);

    let (times, states) = integrate_core(&mut rhs, &y0, opts)?;
    let mut x_states = Vec::with_capacity(states.len());
    let mut z_states = Vec::with_capacity(states.len());
    for y in states {
        x_states.push(y.slice(s![..n]).to_owned());
        z_states.push(y.slice(s![n..]).to_owned());
    }
    Ok(Trajectory {
        times,
        x_states,
        z_states,
        params: TrajectoryParams {
            dt: opts.dt,
            stride: opts.stride,
            method: opts.method,
            act: params.act,
            tau_z: params.tau_z,
        },
    })
}

//! Small fully-connected network with three heads (policy logits, value,
//! strength score) plus an optional rank-classification head, with exact
//! analytic gradients.
//!
//! Parameters live in one flat `Vec<f64>` laid out in this order:
//!
//! 1. first layer weights, input-major: `w1[j * hidden + i]` connects input `j`
//!    to hidden unit `i` (input vectors are sparse, so each input's fan-out is
//!    contiguous)
//! 2. first layer bias (`hidden`)
//! 3. second layer weights `w2[i * hidden + k]` and bias, only when `layers == 2`
//! 4. policy weights `[actions][hidden]` and bias (`actions`)
//! 5. value weights (`hidden`) and bias (1)
//! 6. strength weights (`hidden`) and bias (1)
//! 7. per-action strength weights `[actions][hidden]` and biases (`actions`),
//!    only when the spec has a move readout
//! 8. rank weights `[ranks][hidden]` and bias (`ranks`), only when `ranks > 0`
//!
//! Hidden units use `tanh`; the value head is `tanh`-bounded and the strength
//! head is affine. With a move readout at offset `o`, inputs `o..o+actions`
//! hold the move's one-hot, and the strength head adds
//! `Σ_a x[o+a] * (u_a · h + c_a)`, which lets the score depend on how the
//! move relates to the hidden features of the position.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const CHECKPOINT_MAGIC: &str = "strength-scorer";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("invalid scorer spec: {0}")]
    InvalidSpec(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("checkpoint version {found} is not supported (expected {CHECKPOINT_VERSION})")]
    Version { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScorerSpec {
    pub input_len: usize,
    pub hidden: usize,
    pub layers: usize,
    pub actions: usize,
    /// Size of the rank-classification head; zero disables it.
    pub ranks: usize,
    /// Input offset of the move one-hot used by the per-action strength
    /// readout; `None` disables it.
    pub move_readout: Option<usize>,
}

impl ScorerSpec {
    pub fn new(input_len: usize, hidden: usize, layers: usize, actions: usize) -> Self {
        ScorerSpec {
            input_len,
            hidden,
            layers,
            actions,
            ranks: 0,
            move_readout: None,
        }
    }

    pub fn with_move_readout(mut self, offset: usize) -> Self {
        self.move_readout = Some(offset);
        self
    }

    pub fn with_rank_head(mut self, ranks: usize) -> Self {
        self.ranks = ranks;
        self
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        if self.input_len == 0 || self.actions == 0 {
            return Err(ScorerError::InvalidSpec(
                "input length and action count must be positive".into(),
            ));
        }
        if self.hidden == 0 {
            return Err(ScorerError::InvalidSpec("hidden width must be >= 1".into()));
        }
        if !(1..=2).contains(&self.layers) {
            return Err(ScorerError::InvalidSpec(format!(
                "layer count must be 1 or 2, got {}",
                self.layers
            )));
        }
        if let Some(o) = self.move_readout {
            if o + self.actions > self.input_len {
                return Err(ScorerError::InvalidSpec(format!(
                    "move readout {o}..{} exceeds input length {}",
                    o + self.actions,
                    self.input_len
                )));
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }

    fn layout(&self) -> Layout {
        let h = self.hidden;
        let mut at = 0;
        let mut take = |len: usize| {
            let start = at;
            at += len;
            start
        };
        let w1 = take(self.input_len * h);
        let b1 = take(h);
        let (w2, b2) = if self.layers == 2 {
            (take(h * h), take(h))
        } else {
            (0, 0)
        };
        let wp = take(self.actions * h);
        let bp = take(self.actions);
        let wv = take(h);
        let bv = take(1);
        let wb = take(h);
        let bb = take(1);
        let readout = if self.move_readout.is_some() { self.actions } else { 0 };
        let wa = take(readout * h);
        let ba = take(readout);
        let wr = take(self.ranks * h);
        let br = take(self.ranks);
        Layout {
            w1,
            b1,
            w2,
            b2,
            wp,
            bp,
            wv,
            bv,
            wb,
            bb,
            wa,
            ba,
            wr,
            br,
            total: at,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    wp: usize,
    bp: usize,
    wv: usize,
    bv: usize,
    wb: usize,
    bb: usize,
    wa: usize,
    ba: usize,
    wr: usize,
    br: usize,
    total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams {
    spec: ScorerSpec,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerOutput {
    pub policy_logits: Vec<f64>,
    pub value: f64,
    pub beta: f64,
    /// Empty when the network has no rank head.
    pub rank_logits: Vec<f64>,
}

/// Upstream derivatives of a scalar loss with respect to the network outputs.
/// Empty vectors are treated as zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Upstream {
    pub d_logits: Vec<f64>,
    pub d_value: f64,
    pub d_beta: f64,
    pub d_rank_logits: Vec<f64>,
}

pub type Gradient = Vec<f64>;

/// Reusable activation buffers for forward and backward passes.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    h1: Vec<f64>,
    h2: Vec<f64>,
    dh: Vec<f64>,
    dh_prev: Vec<f64>,
    pub logits: Vec<f64>,
    pub value: f64,
    pub beta: f64,
    pub rank_logits: Vec<f64>,
}

impl Trace {
    pub fn output(&self) -> ScorerOutput {
        ScorerOutput {
            policy_logits: self.logits.clone(),
            value: self.value,
            beta: self.beta,
            rank_logits: self.rank_logits.clone(),
        }
    }
}

/// Uniform initialisation in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` drawn from
/// ChaCha8 seeded with `seed`, in parameter layout order.
pub fn init_params(spec: ScorerSpec, seed: u64) -> Result<ScorerParams, ScorerError> {
    spec.validate()?;
    let layout = spec.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; layout.total];
    let h = spec.hidden;
    let mut fill = |range: std::ops::Range<usize>, fan_in: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for v in &mut values[range] {
            *v = rng.gen_range(-bound..=bound);
        }
    };
    fill(layout.w1..layout.b1 + h, spec.input_len);
    if spec.layers == 2 {
        fill(layout.w2..layout.b2 + h, h);
    }
    fill(layout.wp..layout.total, h);
    Ok(ScorerParams { spec, values })
}

pub fn zero_params(spec: ScorerSpec) -> Result<ScorerParams, ScorerError> {
    spec.validate()?;
    Ok(ScorerParams {
        spec,
        values: vec![0.0; spec.param_count()],
    })
}

impl ScorerParams {
    pub fn from_values(spec: ScorerSpec, values: Vec<f64>) -> Result<Self, ScorerError> {
        spec.validate()?;
        if values.len() != spec.param_count() {
            return Err(ScorerError::LengthMismatch {
                expected: spec.param_count(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScorerError::NonFinite("parameters"));
        }
        Ok(ScorerParams { spec, values })
    }

    pub fn spec(&self) -> ScorerSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn forward(&self, x: &[f64]) -> Result<ScorerOutput, ScorerError> {
        let mut trace = Trace::default();
        self.forward_into(x, &mut trace)?;
        Ok(trace.output())
    }

    /// Forward pass writing all activations into `trace`.
    pub fn forward_into(&self, x: &[f64], trace: &mut Trace) -> Result<(), ScorerError> {
        self.check_input(x)?;
        let spec = self.spec;
        let l = spec.layout();
        let h = spec.hidden;
        let p = &self.values;

        trace.h1.clear();
        trace.h1.extend_from_slice(&p[l.b1..l.b1 + h]);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let col = &p[l.w1 + j * h..l.w1 + (j + 1) * h];
                for (acc, w) in trace.h1.iter_mut().zip(col) {
                    *acc += w * xj;
                }
            }
        }
        trace.h1.iter_mut().for_each(|v| *v = v.tanh());

        if spec.layers == 2 {
            trace.h2.clear();
            for i in 0..h {
                let row = &p[l.w2 + i * h..l.w2 + (i + 1) * h];
                let z = p[l.b2 + i] + dot(row, &trace.h1);
                trace.h2.push(z.tanh());
            }
        }
        let top = if spec.layers == 2 { &trace.h2 } else { &trace.h1 };

        trace.logits.clear();
        for a in 0..spec.actions {
            let row = &p[l.wp + a * h..l.wp + (a + 1) * h];
            trace.logits.push(p[l.bp + a] + dot(row, top));
        }
        trace.value = (p[l.bv] + dot(&p[l.wv..l.wv + h], top)).tanh();
        trace.beta = p[l.bb] + dot(&p[l.wb..l.wb + h], top);
        if let Some(o) = spec.move_readout {
            for (a, &xa) in x[o..o + spec.actions].iter().enumerate() {
                if xa != 0.0 {
                    let row = &p[l.wa + a * h..l.wa + (a + 1) * h];
                    trace.beta += xa * (p[l.ba + a] + dot(row, top));
                }
            }
        }
        trace.rank_logits.clear();
        for r in 0..spec.ranks {
            let row = &p[l.wr + r * h..l.wr + (r + 1) * h];
            trace.rank_logits.push(p[l.br + r] + dot(row, top));
        }
        if !(trace.value.is_finite()
            && trace.beta.is_finite()
            && trace.logits.iter().all(|v| v.is_finite()))
        {
            return Err(ScorerError::NonFinite("forward output"));
        }
        Ok(())
    }

    /// Exact gradient of the loss whose output derivatives are `upstream`.
    pub fn backward(&self, x: &[f64], upstream: &Upstream) -> Result<Gradient, ScorerError> {
        let mut grad = vec![0.0; self.values.len()];
        let mut trace = Trace::default();
        self.forward_into(x, &mut trace)?;
        self.accumulate_gradient(x, &mut trace, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Adds the gradient for one input to `grad`. `trace` must hold the
    /// forward activations for the same `x`.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        trace: &mut Trace,
        upstream: &Upstream,
        grad: &mut [f64],
    ) -> Result<(), ScorerError> {
        self.check_input(x)?;
        let spec = self.spec;
        if grad.len() != self.values.len() {
            return Err(ScorerError::LengthMismatch {
                expected: self.values.len(),
                got: grad.len(),
            });
        }
        check_upstream_len("policy", &upstream.d_logits, spec.actions)?;
        check_upstream_len("rank", &upstream.d_rank_logits, spec.ranks)?;
        let l = spec.layout();
        let h = spec.hidden;
        let p = &self.values;
        let Trace {
            h1,
            h2,
            dh,
            dh_prev,
            value,
            ..
        } = trace;
        let top: &[f64] = if spec.layers == 2 { &h2[..] } else { &h1[..] };

        dh.clear();
        dh.resize(h, 0.0);
        for (a, &g) in upstream.d_logits.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad[l.bp + a] += g;
            for i in 0..h {
                grad[l.wp + a * h + i] += g * top[i];
                dh[i] += g * p[l.wp + a * h + i];
            }
        }
        let dz_v = upstream.d_value * (1.0 - *value * *value);
        if dz_v != 0.0 {
            grad[l.bv] += dz_v;
            for i in 0..h {
                grad[l.wv + i] += dz_v * top[i];
                dh[i] += dz_v * p[l.wv + i];
            }
        }
        let d_beta = upstream.d_beta;
        if d_beta != 0.0 {
            grad[l.bb] += d_beta;
            for i in 0..h {
                grad[l.wb + i] += d_beta * top[i];
                dh[i] += d_beta * p[l.wb + i];
            }
            if let Some(o) = spec.move_readout {
                for (a, &xa) in x[o..o + spec.actions].iter().enumerate() {
                    if xa == 0.0 {
                        continue;
                    }
                    let g = d_beta * xa;
                    grad[l.ba + a] += g;
                    for i in 0..h {
                        grad[l.wa + a * h + i] += g * top[i];
                        dh[i] += g * p[l.wa + a * h + i];
                    }
                }
            }
        }
        for (r, &g) in upstream.d_rank_logits.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad[l.br + r] += g;
            for i in 0..h {
                grad[l.wr + r * h + i] += g * top[i];
                dh[i] += g * p[l.wr + r * h + i];
            }
        }

        // dh now holds dL/d(top activation); turn it into dL/d(pre-activation).
        for (d, a) in dh.iter_mut().zip(top) {
            *d *= 1.0 - a * a;
        }

        if spec.layers == 2 {
            dh_prev.clear();
            dh_prev.resize(h, 0.0);
            for i in 0..h {
                let g = dh[i];
                if g == 0.0 {
                    continue;
                }
                grad[l.b2 + i] += g;
                for k in 0..h {
                    grad[l.w2 + i * h + k] += g * h1[k];
                    dh_prev[k] += g * p[l.w2 + i * h + k];
                }
            }
            for (d, a) in dh_prev.iter_mut().zip(h1.iter()) {
                *d *= 1.0 - a * a;
            }
            std::mem::swap(dh, dh_prev);
        }

        for i in 0..h {
            grad[l.b1 + i] += dh[i];
        }
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let row = &mut grad[l.w1 + j * h..l.w1 + (j + 1) * h];
                for (g, d) in row.iter_mut().zip(dh.iter()) {
                    *g += d * xj;
                }
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ScorerError> {
        if x.len() != self.spec.input_len {
            return Err(ScorerError::LengthMismatch {
                expected: self.spec.input_len,
                got: x.len(),
            });
        }
        Ok(())
    }
}

fn check_upstream_len(head: &'static str, v: &[f64], expected: usize) -> Result<(), ScorerError> {
    if !v.is_empty() && v.len() != expected {
        return Err(ScorerError::LengthMismatch {
            expected,
            got: v.len(),
        });
    }
    if v.iter().any(|g| !g.is_finite()) {
        return Err(ScorerError::NonFinite(head));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `params - lr * grad`, elementwise.
pub fn sgd_step(params: &ScorerParams, grad: &[f64], lr: f64) -> Result<ScorerParams, ScorerError> {
    let mut next = params.clone();
    sgd_step_in_place(&mut next, grad, lr)?;
    Ok(next)
}

pub fn sgd_step_in_place(
    params: &mut ScorerParams,
    grad: &[f64],
    lr: f64,
) -> Result<(), ScorerError> {
    if grad.len() != params.values.len() {
        return Err(ScorerError::LengthMismatch {
            expected: params.values.len(),
            got: grad.len(),
        });
    }
    if !lr.is_finite() {
        return Err(ScorerError::NonFinite("learning rate"));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(ScorerError::NonFinite("gradient"));
    }
    for (p, g) in params.values.iter_mut().zip(grad) {
        *p -= lr * g;
    }
    Ok(())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Writes a checkpoint: one text header line followed by the parameters as
/// little-endian IEEE-754 doubles.
///
/// Header: `strength-scorer v1 input=<n> hidden=<h> layers=<l> actions=<a> ranks=<r> readout=<offset|none> params=<count>`
pub fn save_checkpoint(params: &ScorerParams, path: impl AsRef<Path>) -> Result<(), ScorerError> {
    let mut bytes = checkpoint_header(params).into_bytes();
    bytes.reserve(params.values.len() * 8);
    for v in &params.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

fn checkpoint_header(params: &ScorerParams) -> String {
    let s = params.spec;
    format!(
        "{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION} input={} hidden={} layers={} actions={} ranks={} readout={} params={}\n",
        s.input_len,
        s.hidden,
        s.layers,
        s.actions,
        s.ranks,
        s.move_readout.map_or("none".to_string(), |o| o.to_string()),
        params.values.len()
    )
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ScorerParams, ScorerError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_checkpoint(&bytes)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<ScorerParams, ScorerError> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ScorerError::Corrupt("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| ScorerError::Corrupt("header is not UTF-8".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(CHECKPOINT_MAGIC) {
        return Err(ScorerError::Corrupt("bad magic".into()));
    }
    let version = fields
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| ScorerError::Corrupt("bad version field".into()))?;
    if version != CHECKPOINT_VERSION {
        return Err(ScorerError::Version { found: version });
    }
    let rest: Vec<&str> = fields.collect();
    let keys = ["input", "hidden", "layers", "actions", "ranks", "readout", "params"];
    if rest.len() != keys.len() {
        return Err(ScorerError::Corrupt(format!("expected {} header fields", keys.len() + 2)));
    }
    let mut values = Vec::with_capacity(keys.len());
    for (field, key) in rest.iter().zip(keys) {
        let v = field
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .ok_or_else(|| ScorerError::Corrupt(format!("bad field '{field}', expected {key}=")))?;
        values.push(v);
    }
    let num = |i: usize| -> Result<usize, ScorerError> {
        values[i]
            .parse()
            .map_err(|_| ScorerError::Corrupt(format!("bad value '{}' for {}", values[i], keys[i])))
    };
    let move_readout = match values[5] {
        "none" => None,
        _ => Some(num(5)?),
    };
    let spec = ScorerSpec {
        input_len: num(0)?,
        hidden: num(1)?,
        layers: num(2)?,
        actions: num(3)?,
        ranks: num(4)?,
        move_readout,
    };
    let count = num(6)?;
    spec.validate()?;
    if count != spec.param_count() {
        return Err(ScorerError::Corrupt(format!(
            "header declares {count} params but spec implies {}",
            spec.param_count()
        )));
    }
    let body = &bytes[newline + 1..];
    if body.len() != count * 8 {
        return Err(ScorerError::Corrupt(format!(
            "expected {} parameter bytes, found {}",
            count * 8,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ScorerParams::from_values(spec, values)
}

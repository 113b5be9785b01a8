//! LSTM and GRU sequence regressors with backpropagation through time.
//!
//! LSTM step, over the concatenation `c = [z_prev, x]`:
//!
//! ```text
//! i = σ(W_i c + b_i)    f = σ(W_f c + b_f)    o = σ(W_o c + b_o)
//! s̃ = tanh(W_s c + b_s)
//! s = f ⊙ s_prev + i ⊙ s̃
//! z = o ⊙ tanh(s)
//! ```
//!
//! GRU step (no bias terms):
//!
//! ```text
//! h  = σ(A_h x + G_h z_prev)
//! r  = σ(A_r x + G_r z_prev)
//! z' = tanh(A x + r ⊙ (G z_prev))
//! z  = h ⊙ z_prev + (1 − h) ⊙ z'
//! ```
//!
//! The final hidden state feeds a dense regression head.

use serde::{Deserialize, Serialize};

use crate::data::{DatasetView, Feature};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{fit_minibatch, sigmoid, Activation, DenseNet, Params, TrainConfig};
use crate::preprocess::Standardizer;
use crate::rng::SeededRng;

fn uniform_matrix(rows: usize, cols: usize, bound: f64, rng: &mut SeededRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(-bound, bound))
}

fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

fn finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub hidden_size: usize,
    pub input_size: usize,
    pub w_input: Matrix,
    pub w_forget: Matrix,
    pub w_output: Matrix,
    pub w_cell: Matrix,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_output: Vec<f64>,
    pub b_cell: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub z: Vec<f64>,
    pub s: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            z: vec![0.0; hidden],
            s: vec![0.0; hidden],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    pub concat: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub s_prev: Vec<f64>,
    pub tanh_s: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let w = Matrix::zeros(hidden_size, hidden_size + input_size);
        let b = vec![0.0; hidden_size];
        LstmParams {
            hidden_size,
            input_size,
            w_input: w.clone(),
            w_forget: w.clone(),
            w_output: w.clone(),
            w_cell: w,
            b_input: b.clone(),
            b_forget: b.clone(),
            b_output: b.clone(),
            b_cell: b,
        }
    }

    /// Uniform ±1/√(hidden + input) initialization.
    pub fn random(hidden_size: usize, input_size: usize, rng: &mut SeededRng) -> Self {
        let cols = hidden_size + input_size;
        let bound = 1.0 / (cols as f64).sqrt();
        let mut p = Self::zeros(hidden_size, input_size);
        p.w_input = uniform_matrix(hidden_size, cols, bound, rng);
        p.w_forget = uniform_matrix(hidden_size, cols, bound, rng);
        p.w_output = uniform_matrix(hidden_size, cols, bound, rng);
        p.w_cell = uniform_matrix(hidden_size, cols, bound, rng);
        for b in [
            &mut p.b_input,
            &mut p.b_forget,
            &mut p.b_output,
            &mut p.b_cell,
        ] {
            b.iter_mut()
                .for_each(|v| *v = rng.uniform_range(-bound, bound));
        }
        p
    }
}

impl Params for LstmParams {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_input.as_slice(),
            self.w_forget.as_slice(),
            self.w_output.as_slice(),
            self.w_cell.as_slice(),
            &self.b_input,
            &self.b_forget,
            &self.b_output,
            &self.b_cell,
        ]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_input.as_mut_slice(),
            self.w_forget.as_mut_slice(),
            self.w_output.as_mut_slice(),
            self.w_cell.as_mut_slice(),
            &mut self.b_input,
            &mut self.b_forget,
            &mut self.b_output,
            &mut self.b_cell,
        ]
    }
}

pub fn lstm_cell_forward(
    p: &LstmParams,
    state: &LstmState,
    x: &[f64],
) -> Result<(LstmState, LstmCache)> {
    let h = p.hidden_size;
    check_len("lstm input", p.input_size, x.len())?;
    check_len("lstm hidden state", h, state.z.len())?;
    check_len("lstm cell state", h, state.s.len())?;

    let mut concat = Vec::with_capacity(h + x.len());
    concat.extend_from_slice(&state.z);
    concat.extend_from_slice(x);

    let gate = |w: &Matrix, b: &[f64], act: fn(f64) -> f64| -> Vec<f64> {
        let mut a = w.matvec(&concat);
        for (v, bi) in a.iter_mut().zip(b) {
            *v = act(*v + bi);
        }
        a
    };
    let ig = gate(&p.w_input, &p.b_input, sigmoid);
    let fg = gate(&p.w_forget, &p.b_forget, sigmoid);
    let og = gate(&p.w_output, &p.b_output, sigmoid);
    let cand = gate(&p.w_cell, &p.b_cell, f64::tanh);

    let s: Vec<f64> = (0..h)
        .map(|k| fg[k] * state.s[k] + ig[k] * cand[k])
        .collect();
    let tanh_s: Vec<f64> = s.iter().map(|v| v.tanh()).collect();
    let z: Vec<f64> = (0..h).map(|k| og[k] * tanh_s[k]).collect();
    finite(&s, "lstm cell state")?;
    finite(&z, "lstm hidden state")?;

    let cache = LstmCache {
        concat,
        input_gate: ig,
        forget_gate: fg,
        output_gate: og,
        candidate: cand,
        s_prev: state.s.clone(),
        tanh_s,
    };
    Ok((LstmState { z, s }, cache))
}

/// One LSTM step backwards. Takes `∂L/∂z` and `∂L/∂s` at this step's output,
/// accumulates parameter gradients into `g`, and returns `(∂L/∂z_prev,
/// ∂L/∂s_prev, ∂L/∂x)`.
pub fn lstm_cell_backward(
    p: &LstmParams,
    cache: &LstmCache,
    dz: &[f64],
    ds: &[f64],
    g: &mut LstmParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = p.hidden_size;
    let mut a_i = vec![0.0; h];
    let mut a_f = vec![0.0; h];
    let mut a_o = vec![0.0; h];
    let mut a_c = vec![0.0; h];
    let mut ds_prev = vec![0.0; h];
    for k in 0..h {
        let (i, f, o, c) = (
            cache.input_gate[k],
            cache.forget_gate[k],
            cache.output_gate[k],
            cache.candidate[k],
        );
        let ts = cache.tanh_s[k];
        let d_o = dz[k] * ts;
        let ds_total = ds[k] + dz[k] * o * (1.0 - ts * ts);
        a_o[k] = d_o * o * (1.0 - o);
        a_f[k] = ds_total * cache.s_prev[k] * f * (1.0 - f);
        a_i[k] = ds_total * c * i * (1.0 - i);
        a_c[k] = ds_total * i * (1.0 - c * c);
        ds_prev[k] = ds_total * f;
    }
    let mut d_concat = vec![0.0; cache.concat.len()];
    for (w, gw, gb, a) in [
        (&p.w_input, &mut g.w_input, &mut g.b_input, &a_i),
        (&p.w_forget, &mut g.w_forget, &mut g.b_forget, &a_f),
        (&p.w_output, &mut g.w_output, &mut g.b_output, &a_o),
        (&p.w_cell, &mut g.w_cell, &mut g.b_cell, &a_c),
    ] {
        gw.add_outer(1.0, a, &cache.concat);
        gb.iter_mut().zip(a.iter()).for_each(|(b, d)| *b += d);
        w.matvec_t_acc(a, &mut d_concat);
    }
    let dx = d_concat.split_off(h);
    (d_concat, ds_prev, dx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub hidden_size: usize,
    pub input_size: usize,
    /// Update gate, input weights (`h × in`).
    pub w_update: Matrix,
    /// Update gate, recurrent weights (`h × h`).
    pub u_update: Matrix,
    pub w_reset: Matrix,
    pub u_reset: Matrix,
    pub w_candidate: Matrix,
    pub u_candidate: Matrix,
}

#[derive(Debug, Clone)]
pub struct GruCache {
    pub x: Vec<f64>,
    pub z_prev: Vec<f64>,
    pub update_gate: Vec<f64>,
    pub reset_gate: Vec<f64>,
    /// `G z_prev`
    pub recurrent_candidate: Vec<f64>,
    pub candidate: Vec<f64>,
}

impl GruParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let wx = Matrix::zeros(hidden_size, input_size);
        let wh = Matrix::zeros(hidden_size, hidden_size);
        GruParams {
            hidden_size,
            input_size,
            w_update: wx.clone(),
            u_update: wh.clone(),
            w_reset: wx.clone(),
            u_reset: wh.clone(),
            w_candidate: wx,
            u_candidate: wh,
        }
    }

    /// Uniform ±1/√hidden initialization.
    pub fn random(hidden_size: usize, input_size: usize, rng: &mut SeededRng) -> Self {
        let bound = 1.0 / (hidden_size as f64).sqrt();
        GruParams {
            hidden_size,
            input_size,
            w_update: uniform_matrix(hidden_size, input_size, bound, rng),
            u_update: uniform_matrix(hidden_size, hidden_size, bound, rng),
            w_reset: uniform_matrix(hidden_size, input_size, bound, rng),
            u_reset: uniform_matrix(hidden_size, hidden_size, bound, rng),
            w_candidate: uniform_matrix(hidden_size, input_size, bound, rng),
            u_candidate: uniform_matrix(hidden_size, hidden_size, bound, rng),
        }
    }
}

impl Params for GruParams {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_update.as_slice(),
            self.u_update.as_slice(),
            self.w_reset.as_slice(),
            self.u_reset.as_slice(),
            self.w_candidate.as_slice(),
            self.u_candidate.as_slice(),
        ]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_update.as_mut_slice(),
            self.u_update.as_mut_slice(),
            self.w_reset.as_mut_slice(),
            self.u_reset.as_mut_slice(),
            self.w_candidate.as_mut_slice(),
            self.u_candidate.as_mut_slice(),
        ]
    }
}

pub fn gru_cell_forward(p: &GruParams, z_prev: &[f64], x: &[f64]) -> Result<(Vec<f64>, GruCache)> {
    let h = p.hidden_size;
    check_len("gru input", p.input_size, x.len())?;
    check_len("gru hidden state", h, z_prev.len())?;

    let gate = |w: &Matrix, u: &Matrix| -> Vec<f64> {
        let mut a = w.matvec(x);
        let b = u.matvec(z_prev);
        a.iter_mut().zip(b).for_each(|(v, r)| *v = sigmoid(*v + r));
        a
    };
    let hg = gate(&p.w_update, &p.u_update);
    let rg = gate(&p.w_reset, &p.u_reset);
    let gz = p.u_candidate.matvec(z_prev);
    let mut cand = p.w_candidate.matvec(x);
    for k in 0..h {
        cand[k] = (cand[k] + rg[k] * gz[k]).tanh();
    }
    let z: Vec<f64> = (0..h)
        .map(|k| hg[k] * z_prev[k] + (1.0 - hg[k]) * cand[k])
        .collect();
    finite(&z, "gru hidden state")?;
    let cache = GruCache {
        x: x.to_vec(),
        z_prev: z_prev.to_vec(),
        update_gate: hg,
        reset_gate: rg,
        recurrent_candidate: gz,
        candidate: cand,
    };
    Ok((z, cache))
}

/// One GRU step backwards; returns `(∂L/∂z_prev, ∂L/∂x)`.
pub fn gru_cell_backward(
    p: &GruParams,
    cache: &GruCache,
    dz: &[f64],
    g: &mut GruParams,
) -> (Vec<f64>, Vec<f64>) {
    let h = p.hidden_size;
    let mut dz_prev = vec![0.0; h];
    let mut dx = vec![0.0; p.input_size];
    let mut a_c = vec![0.0; h];
    let mut a_h = vec![0.0; h];
    let mut a_r = vec![0.0; h];
    let mut d_gz = vec![0.0; h];
    for k in 0..h {
        let (hk, rk, ck) = (
            cache.update_gate[k],
            cache.reset_gate[k],
            cache.candidate[k],
        );
        dz_prev[k] = dz[k] * hk;
        let d_h = dz[k] * (cache.z_prev[k] - ck);
        let d_c = dz[k] * (1.0 - hk);
        a_c[k] = d_c * (1.0 - ck * ck);
        let d_r = a_c[k] * cache.recurrent_candidate[k];
        d_gz[k] = a_c[k] * rk;
        a_h[k] = d_h * hk * (1.0 - hk);
        a_r[k] = d_r * rk * (1.0 - rk);
    }
    g.w_candidate.add_outer(1.0, &a_c, &cache.x);
    p.w_candidate.matvec_t_acc(&a_c, &mut dx);
    g.u_candidate.add_outer(1.0, &d_gz, &cache.z_prev);
    p.u_candidate.matvec_t_acc(&d_gz, &mut dz_prev);

    g.w_update.add_outer(1.0, &a_h, &cache.x);
    p.w_update.matvec_t_acc(&a_h, &mut dx);
    g.u_update.add_outer(1.0, &a_h, &cache.z_prev);
    p.u_update.matvec_t_acc(&a_h, &mut dz_prev);

    g.w_reset.add_outer(1.0, &a_r, &cache.x);
    p.w_reset.matvec_t_acc(&a_r, &mut dx);
    g.u_reset.add_outer(1.0, &a_r, &cache.z_prev);
    p.u_reset.matvec_t_acc(&a_r, &mut dz_prev);
    (dz_prev, dx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Lstm,
    Gru,
}

impl std::fmt::Display for Arch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Arch::Lstm => "lstm",
            Arch::Gru => "gru",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Lstm(LstmParams),
    Gru(GruParams),
}

impl Cell {
    pub fn hidden_size(&self) -> usize {
        match self {
            Cell::Lstm(p) => p.hidden_size,
            Cell::Gru(p) => p.hidden_size,
        }
    }

    pub fn input_size(&self) -> usize {
        match self {
            Cell::Lstm(p) => p.input_size,
            Cell::Gru(p) => p.input_size,
        }
    }

    pub fn arch(&self) -> Arch {
        match self {
            Cell::Lstm(_) => Arch::Lstm,
            Cell::Gru(_) => Arch::Gru,
        }
    }
}

/// A recurrent cell unrolled over the sequence, with a dense head on the
/// final hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRegressor {
    pub cell: Cell,
    pub head: DenseNet,
}

enum StepCache {
    Lstm(LstmCache),
    Gru(GruCache),
}

impl Params for SequenceRegressor {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut v = match &self.cell {
            Cell::Lstm(p) => p.param_slices(),
            Cell::Gru(p) => p.param_slices(),
        };
        v.extend(self.head.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = match &mut self.cell {
            Cell::Lstm(p) => p.param_slices_mut(),
            Cell::Gru(p) => p.param_slices_mut(),
        };
        v.extend(self.head.param_slices_mut());
        v
    }
}

impl SequenceRegressor {
    /// `head_sizes` are the hidden widths of the head; a final width-1
    /// identity layer is appended. Hidden head layers use tanh.
    pub fn new(
        arch: Arch,
        input_size: usize,
        hidden_size: usize,
        head_sizes: &[usize],
        seed: u64,
    ) -> Result<Self> {
        if hidden_size == 0 || input_size == 0 {
            return Err(Error::InvalidArgument(
                "recurrent sizes must be >= 1".into(),
            ));
        }
        let mut rng = SeededRng::new(seed);
        let cell = match arch {
            Arch::Lstm => Cell::Lstm(LstmParams::random(hidden_size, input_size, &mut rng)),
            Arch::Gru => Cell::Gru(GruParams::random(hidden_size, input_size, &mut rng)),
        };
        let mut sizes = vec![hidden_size];
        sizes.extend_from_slice(head_sizes);
        sizes.push(1);
        let mut acts = vec![Activation::Tanh; head_sizes.len()];
        acts.push(Activation::Identity);
        let head = DenseNet::new(&sizes, &acts, &mut rng)?;
        Ok(SequenceRegressor { cell, head })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    fn run(&self, seq: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<StepCache>)> {
        if seq.is_empty() {
            return Err(Error::Empty("sequence"));
        }
        let h = self.cell.hidden_size();
        let mut caches = Vec::with_capacity(seq.len());
        match &self.cell {
            Cell::Lstm(p) => {
                let mut st = LstmState::zeros(h);
                for x in seq {
                    let (next, c) = lstm_cell_forward(p, &st, x)?;
                    caches.push(StepCache::Lstm(c));
                    st = next;
                }
                Ok((st.z, caches))
            }
            Cell::Gru(p) => {
                let mut z = vec![0.0; h];
                for x in seq {
                    let (next, c) = gru_cell_forward(p, &z, x)?;
                    caches.push(StepCache::Gru(c));
                    z = next;
                }
                Ok((z, caches))
            }
        }
    }

    /// Final hidden state after consuming `seq` from a zero initial state.
    pub fn encode(&self, seq: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self.run(seq)?.0)
    }

    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<f64> {
        let z = self.encode(seq)?;
        Ok(self.head.predict(&z)?[0])
    }

    /// Mean squared error over the batch and its exact gradient with respect
    /// to every parameter, via backpropagation through time.
    pub fn bptt_gradients(
        &self,
        seqs: &[&[Vec<f64>]],
        targets: &[f64],
    ) -> Result<(f64, SequenceRegressor)> {
        check_len("recurrent targets", seqs.len(), targets.len())?;
        if seqs.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let n = seqs.len() as f64;
        let mut grads = self.zeros_like();
        let mut loss = 0.0;
        let h = self.cell.hidden_size();
        for (seq, &t) in seqs.iter().zip(targets) {
            let (z, caches) = self.run(seq)?;
            let tr = self.head.forward(&z)?;
            let err = tr.output()[0] - t;
            loss += err * err;
            let d_out = [2.0 * err / n];
            let mut dz = self.head.backward(&tr, &d_out, &mut grads.head);
            match (&self.cell, &mut grads.cell) {
                (Cell::Lstm(p), Cell::Lstm(g)) => {
                    let mut ds = vec![0.0; h];
                    for c in caches.iter().rev() {
                        let StepCache::Lstm(c) = c else {
                            unreachable!()
                        };
                        let (dzp, dsp, _) = lstm_cell_backward(p, c, &dz, &ds, g);
                        dz = dzp;
                        ds = dsp;
                    }
                }
                (Cell::Gru(p), Cell::Gru(g)) => {
                    for c in caches.iter().rev() {
                        let StepCache::Gru(c) = c else { unreachable!() };
                        dz = gru_cell_backward(p, c, &dz, g).0;
                    }
                }
                _ => unreachable!("gradient buffer mirrors the model"),
            }
        }
        if !grads.all_finite() {
            return Err(Error::NonFinite("recurrent gradient".into()));
        }
        Ok((loss / n, grads))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentConfig {
    pub hidden_size: usize,
    pub head_sizes: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for RecurrentConfig {
    fn default() -> Self {
        RecurrentConfig {
            hidden_size: 16,
            head_sizes: vec![8],
            train: TrainConfig {
                clip_norm: Some(5.0),
                ..TrainConfig::default()
            },
        }
    }
}

/// A trained recurrent model together with the fold-local scaling it was
/// trained under and the order in which view columns become timesteps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRecurrent {
    pub model: SequenceRegressor,
    pub feature_names: Vec<Feature>,
    pub sequence_order: Vec<Feature>,
    pub inputs: Standardizer,
    pub target: Standardizer,
    pub loss_trace: Vec<f64>,
}

/// Chronological order of a view's components: each present component is
/// one scalar timestep.
pub fn sequence_order(features: &[Feature]) -> Vec<Feature> {
    let mut order = features.to_vec();
    order.sort();
    order
}

fn encode_rows(
    x: &Matrix,
    features: &[Feature],
    order: &[Feature],
    inputs: &Standardizer,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let cols: Vec<usize> = order
        .iter()
        .map(|f| {
            features
                .iter()
                .position(|g| g == f)
                .expect("order is a permutation of features")
        })
        .collect();
    x.row_iter()
        .map(|row| {
            let z = inputs.transform_row(row)?;
            Ok(cols.iter().map(|&j| vec![z[j]]).collect())
        })
        .collect()
}

pub fn train_recurrent(
    view: &DatasetView,
    arch: Arch,
    cfg: &RecurrentConfig,
) -> Result<TrainedRecurrent> {
    if view.is_empty() {
        return Err(Error::Empty("training view"));
    }
    let order = sequence_order(&view.feature_names);
    let inputs = Standardizer::fit(&view.matrix)?;
    let target = Standardizer::fit_vector(&view.targets)?;
    let seqs = encode_rows(&view.matrix, &view.feature_names, &order, &inputs)?;
    let ys: Vec<f64> = view
        .targets
        .iter()
        .map(|t| target.transform_scalar(*t))
        .collect();

    let mut model =
        SequenceRegressor::new(arch, 1, cfg.hidden_size, &cfg.head_sizes, cfg.train.seed)?;
    let loss_trace = fit_minibatch(&mut model, seqs.len(), &cfg.train, |m, batch, _| {
        let bs: Vec<&[Vec<f64>]> = batch.iter().map(|&i| seqs[i].as_slice()).collect();
        let bt: Vec<f64> = batch.iter().map(|&i| ys[i]).collect();
        let (loss, g) = m.bptt_gradients(&bs, &bt)?;
        Ok((loss, g.to_flat()))
    })?;
    Ok(TrainedRecurrent {
        model,
        feature_names: view.feature_names.clone(),
        sequence_order: order,
        inputs,
        target,
        loss_trace,
    })
}

impl TrainedRecurrent {
    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_len(
            "recurrent model features",
            self.feature_names.len(),
            x.cols(),
        )?;
        let seqs = encode_rows(x, &self.feature_names, &self.sequence_order, &self.inputs)?;
        seqs.iter()
            .map(|s| Ok(self.target.inverse_scalar(self.model.predict(s)?)))
            .collect()
    }
}

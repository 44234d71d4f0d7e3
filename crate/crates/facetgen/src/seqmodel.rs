//! A compact trainable encoder-decoder with exact gradients.
//!
//! The encoder mean-pools token embeddings and projects them through a tanh
//! layer into a context vector. The decoder is a single gated recurrent cell
//! that receives the previous hidden state, the previous output token's
//! embedding, and the context at every step, followed by a linear projection
//! to vocabulary logits. Everything is double precision and deterministic;
//! gradients are hand-derived backpropagation validated against central
//! finite differences.

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{TokenSequence, Vocabulary};

/// Model dimensions and decoding constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub max_input_tokens: usize,
    pub max_output_tokens: usize,
    pub bos_id: u32,
    pub eos_id: u32,
    pub init_seed: u64,
}

impl ModelConfig {
    pub fn new(vocab_size: usize, embedding_dim: usize, hidden_dim: usize) -> Self {
        ModelConfig {
            vocab_size,
            embedding_dim,
            hidden_dim,
            max_input_tokens: 512,
            max_output_tokens: 32,
            bos_id: crate::text::BOS_ID,
            eos_id: crate::text::EOS_ID,
            init_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 || self.embedding_dim < 1 || self.hidden_dim < 1 {
            return Err(Error::Config("model dimensions too small".into()));
        }
        if self.max_input_tokens < 2 || self.max_output_tokens < 2 {
            return Err(Error::Config(
                "maximum sequence lengths must be >= 2".into(),
            ));
        }
        if self.bos_id as usize >= self.vocab_size || self.eos_id as usize >= self.vocab_size {
            return Err(Error::Config("bos/eos id outside vocabulary".into()));
        }
        Ok(())
    }

    fn gate_input_dim(&self) -> usize {
        2 * self.hidden_dim + self.embedding_dim
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = W x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = 0.0;
            for (w, xv) in row.iter().zip(x) {
                acc += w * xv;
            }
            *yi = acc;
        }
        y
    }

    /// x = Wᵀ y
    pub fn tmatvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut x = vec![0.0; self.cols];
        for (&yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yi == 0.0 {
                continue;
            }
            for (xj, w) in x.iter_mut().zip(row) {
                *xj += w * yi;
            }
        }
        x
    }

    /// W += a bᵀ
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (&ai, row) in a.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if ai == 0.0 {
                continue;
            }
            for (w, bv) in row.iter_mut().zip(b) {
                *w += ai * bv;
            }
        }
    }
}

/// The model's weight blocks; gradients and optimizer moments share this shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamValues {
    /// Token embeddings, vocab x embed.
    pub emb: Mat,
    /// Encoder projection, hidden x embed, plus bias.
    pub enc_w: Mat,
    pub enc_b: Vec<f64>,
    /// Update gate, hidden x (2*hidden + embed), plus bias.
    pub gate_z_w: Mat,
    pub gate_z_b: Vec<f64>,
    /// Reset gate.
    pub gate_r_w: Mat,
    pub gate_r_b: Vec<f64>,
    /// Candidate state.
    pub cand_w: Mat,
    pub cand_b: Vec<f64>,
    /// Output projection, vocab x hidden, plus bias.
    pub out_w: Mat,
    pub out_b: Vec<f64>,
}

impl ParamValues {
    pub fn zeros(config: &ModelConfig) -> Self {
        let (v, e, h) = (config.vocab_size, config.embedding_dim, config.hidden_dim);
        let d = config.gate_input_dim();
        ParamValues {
            emb: Mat::zeros(v, e),
            enc_w: Mat::zeros(h, e),
            enc_b: vec![0.0; h],
            gate_z_w: Mat::zeros(h, d),
            gate_z_b: vec![0.0; h],
            gate_r_w: Mat::zeros(h, d),
            gate_r_b: vec![0.0; h],
            cand_w: Mat::zeros(h, d),
            cand_b: vec![0.0; h],
            out_w: Mat::zeros(v, h),
            out_b: vec![0.0; v],
        }
    }

    fn slices(&self) -> [&[f64]; 11] {
        [
            &self.emb.data,
            &self.enc_w.data,
            &self.enc_b,
            &self.gate_z_w.data,
            &self.gate_z_b,
            &self.gate_r_w.data,
            &self.gate_r_b,
            &self.cand_w.data,
            &self.cand_b,
            &self.out_w.data,
            &self.out_b,
        ]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 11] {
        [
            &mut self.emb.data,
            &mut self.enc_w.data,
            &mut self.enc_b,
            &mut self.gate_z_w.data,
            &mut self.gate_z_b,
            &mut self.gate_r_w.data,
            &mut self.gate_r_b,
            &mut self.cand_w.data,
            &mut self.cand_b,
            &mut self.out_w.data,
            &mut self.out_b,
        ]
    }

    pub fn flat_len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn flat_get(&self, mut idx: usize) -> f64 {
        for s in self.slices() {
            if idx < s.len() {
                return s[idx];
            }
            idx -= s.len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_add(&mut self, mut idx: usize, delta: f64) {
        for s in self.slices_mut() {
            if idx < s.len() {
                s[idx] += delta;
                return;
            }
            idx -= s.len();
        }
        panic!("flat index out of range");
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            for v in s.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &ParamValues, factor: f64) {
        let mut mine = self.slices_mut();
        let theirs = other.slices();
        for (dst, src) in mine.iter_mut().zip(theirs.iter()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += factor * s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// Model parameters together with their configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub config: ModelConfig,
    pub values: ParamValues,
}

/// Encoder output: the context vector v.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedContext(pub Vec<f64>);

/// Deterministic initialization: weights uniform in (-s, s) with
/// s = 1/sqrt(fan-in), biases zero.
pub fn init_parameters(config: &ModelConfig) -> Result<Parameters> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
    let mut values = ParamValues::zeros(config);
    let mut fill = |mat: &mut Mat| {
        let scale = 1.0 / (mat.cols as f64).sqrt();
        for v in mat.data.iter_mut() {
            *v = rng.random_range(-scale..scale);
        }
    };
    // The embedding's fan-in is its width; the rest use their input columns.
    fill(&mut values.emb);
    fill(&mut values.enc_w);
    fill(&mut values.gate_z_w);
    fill(&mut values.gate_r_w);
    fill(&mut values.cand_w);
    fill(&mut values.out_w);
    Ok(Parameters {
        config: config.clone(),
        values,
    })
}

/// All-zero parameters; the output distribution is exactly uniform.
pub fn zero_parameters(config: &ModelConfig) -> Result<Parameters> {
    config.validate()?;
    Ok(Parameters {
        config: config.clone(),
        values: ParamValues::zeros(config),
    })
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_tokens(params: &Parameters, ids: &[u32]) -> Result<()> {
    for &id in ids {
        if id as usize >= params.config.vocab_size {
            return Err(Error::InvalidTokenId(id));
        }
    }
    Ok(())
}

struct EncodeTrace {
    mean: Vec<f64>,
    v: Vec<f64>,
}

fn encode_trace(params: &Parameters, input: &TokenSequence) -> Result<EncodeTrace> {
    if input.is_empty() {
        return Err(Error::EmptyInput);
    }
    if input.len() > params.config.max_input_tokens {
        return Err(Error::InputTooLong {
            len: input.len(),
            max: params.config.max_input_tokens,
        });
    }
    check_tokens(params, input.as_slice())?;
    let e = params.config.embedding_dim;
    let mut mean = vec![0.0; e];
    for &id in input.as_slice() {
        for (m, w) in mean.iter_mut().zip(params.values.emb.row(id as usize)) {
            *m += w;
        }
    }
    let inv_len = 1.0 / input.len() as f64;
    for m in mean.iter_mut() {
        *m *= inv_len;
    }
    let mut v = params.values.enc_w.matvec(&mean);
    for (vi, b) in v.iter_mut().zip(&params.values.enc_b) {
        *vi = (*vi + b).tanh();
    }
    Ok(EncodeTrace { mean, v })
}

/// Encode an input sequence into a context vector. Position-agnostic by
/// construction: permuting the input tokens leaves the context unchanged.
pub fn encode(params: &Parameters, input: &TokenSequence) -> Result<EncodedContext> {
    Ok(EncodedContext(encode_trace(params, input)?.v))
}

struct CellState {
    x: Vec<f64>,
    xc: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

fn cell_forward(params: &Parameters, h_prev: &[f64], prev_tok: u32, v: &[f64]) -> CellState {
    let hdim = params.config.hidden_dim;
    let emb = params.values.emb.row(prev_tok as usize);
    let mut x = Vec::with_capacity(params.config.gate_input_dim());
    x.extend_from_slice(h_prev);
    x.extend_from_slice(emb);
    x.extend_from_slice(v);

    let mut z = params.values.gate_z_w.matvec(&x);
    for (zi, b) in z.iter_mut().zip(&params.values.gate_z_b) {
        *zi = sigmoid(*zi + b);
    }
    let mut r = params.values.gate_r_w.matvec(&x);
    for (ri, b) in r.iter_mut().zip(&params.values.gate_r_b) {
        *ri = sigmoid(*ri + b);
    }
    let mut xc = x.clone();
    for i in 0..hdim {
        xc[i] = r[i] * h_prev[i];
    }
    let mut c = params.values.cand_w.matvec(&xc);
    for (ci, b) in c.iter_mut().zip(&params.values.cand_b) {
        *ci = (*ci + b).tanh();
    }
    let h: Vec<f64> = (0..hdim)
        .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * c[i])
        .collect();
    CellState { x, xc, z, r, c, h }
}

fn output_logits(params: &Parameters, h: &[f64]) -> Vec<f64> {
    let mut logits = params.values.out_w.matvec(h);
    for (l, b) in logits.iter_mut().zip(&params.values.out_b) {
        *l += b;
    }
    logits
}

/// log(sum(exp(logits))) with max-shifting.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    max + sum.ln()
}

fn validate_target(params: &Parameters, target: &TokenSequence) -> Result<()> {
    if target.is_empty() {
        return Err(Error::InvalidTarget("empty target".into()));
    }
    if target.len() > params.config.max_output_tokens {
        return Err(Error::TargetTooLong {
            len: target.len(),
            max: params.config.max_output_tokens,
        });
    }
    if *target.as_slice().last().unwrap() != params.config.eos_id {
        return Err(Error::InvalidTarget(
            "target must end with the end-of-sequence token".into(),
        ));
    }
    check_tokens(params, target.as_slice())
}

/// Per-token mean negative log-likelihood of `target` under teacher forcing,
/// conditioning each step on the context and the gold prefix.
pub fn sequence_nll(
    params: &Parameters,
    context: &EncodedContext,
    target: &TokenSequence,
) -> Result<f64> {
    validate_target(params, target)?;
    let mut h = vec![0.0; params.config.hidden_dim];
    let mut prev = params.config.bos_id;
    let mut total = 0.0;
    for &tgt in target.as_slice() {
        let state = cell_forward(params, &h, prev, &context.0);
        let logits = output_logits(params, &state.h);
        let lse = log_sum_exp(&logits);
        total += lse - logits[tgt as usize];
        h = state.h;
        prev = tgt;
    }
    let nll = total / target.len() as f64;
    if !nll.is_finite() {
        return Err(Error::NumericOverflow("sequence nll is not finite".into()));
    }
    Ok(nll)
}

/// Unnormalized next-token scores after consuming `prefix`; their softmax is
/// the conditional distribution used by [`sequence_nll`].
pub fn step_logits(
    params: &Parameters,
    context: &EncodedContext,
    prefix: &[u32],
) -> Result<Vec<f64>> {
    if prefix.len() >= params.config.max_output_tokens {
        return Err(Error::TargetTooLong {
            len: prefix.len(),
            max: params.config.max_output_tokens,
        });
    }
    check_tokens(params, prefix)?;
    let mut h = vec![0.0; params.config.hidden_dim];
    let mut prev = params.config.bos_id;
    for &tok in prefix {
        let state = cell_forward(params, &h, prev, &context.0);
        h = state.h;
        prev = tok;
    }
    let state = cell_forward(params, &h, prev, &context.0);
    Ok(output_logits(params, &state.h))
}

/// Incremental decoding state: the hidden vector plus the token whose
/// embedding feeds the next step.
#[derive(Clone, Debug)]
pub struct DecoderState {
    h: Vec<f64>,
    prev: u32,
}

impl DecoderState {
    /// State after a step that produced `h` and chose `token`.
    pub fn advance(h: Vec<f64>, token: u32) -> Self {
        DecoderState { h, prev: token }
    }
}

/// Fresh decoder state: zero hidden vector, start token pending.
pub fn decoder_start(params: &Parameters) -> DecoderState {
    DecoderState {
        h: vec![0.0; params.config.hidden_dim],
        prev: params.config.bos_id,
    }
}

/// Run one decoder step, returning the next hidden vector and the logits for
/// the next token. Chaining steps reproduces [`step_logits`] exactly.
pub fn decoder_step(
    params: &Parameters,
    context: &EncodedContext,
    state: &DecoderState,
) -> (Vec<f64>, Vec<f64>) {
    let cell = cell_forward(params, &state.h, state.prev, &context.0);
    let logits = output_logits(params, &cell.h);
    (cell.h, logits)
}

/// Convenience: NLL of a (input, target) pair, encoding the input first.
pub fn example_nll(
    params: &Parameters,
    input: &TokenSequence,
    target: &TokenSequence,
) -> Result<f64> {
    let context = encode(params, input)?;
    sequence_nll(params, &context, target)
}

/// One weighted example in a gradient batch.
#[derive(Clone, Copy)]
pub struct BatchItem<'a> {
    pub input: &'a TokenSequence,
    pub target: &'a TokenSequence,
    pub weight: f64,
}

/// Loss and exact gradient of the weighted NLL over a batch.
///
/// With `normalize` the weighted sum is divided by the total weight;
/// without it the result is linear in the weights.
pub fn nll_gradient(
    params: &Parameters,
    batch: &[BatchItem<'_>],
    normalize: bool,
) -> Result<(f64, ParamValues)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty gradient batch".into()));
    }
    if batch.iter().any(|item| item.weight <= 0.0) {
        return Err(Error::InvalidArgument(
            "example weights must be positive".into(),
        ));
    }
    let mut grads = ParamValues::zeros(&params.config);
    let mut loss = 0.0;
    let mut total_weight = 0.0;
    for item in batch {
        loss += item.weight * backprop_example(params, item, &mut grads)?;
        total_weight += item.weight;
    }
    if normalize {
        loss /= total_weight;
        grads.scale(1.0 / total_weight);
    }
    if !loss.is_finite() || !grads.is_finite() {
        return Err(Error::NumericOverflow("non-finite loss or gradient".into()));
    }
    Ok((loss, grads))
}

/// Forward + backward for one example; accumulates `weight * dNLL/dθ` into
/// `grads` and returns the example's unweighted NLL.
fn backprop_example(
    params: &Parameters,
    item: &BatchItem<'_>,
    grads: &mut ParamValues,
) -> Result<f64> {
    validate_target(params, item.target)?;
    let enc = encode_trace(params, item.input)?;
    let hdim = params.config.hidden_dim;
    let edim = params.config.embedding_dim;
    let steps = item.target.len();

    // Forward pass, keeping per-step state.
    let mut states: Vec<CellState> = Vec::with_capacity(steps);
    let mut probs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut prev_tokens: Vec<u32> = Vec::with_capacity(steps);
    let mut h = vec![0.0; hdim];
    let mut prev = params.config.bos_id;
    let mut nll = 0.0;
    for &tgt in item.target.as_slice() {
        let state = cell_forward(params, &h, prev, &enc.v);
        let logits = output_logits(params, &state.h);
        let lse = log_sum_exp(&logits);
        nll += lse - logits[tgt as usize];
        let p: Vec<f64> = logits.iter().map(|l| (l - lse).exp()).collect();
        h = state.h.clone();
        prev_tokens.push(prev);
        prev = tgt;
        states.push(state);
        probs.push(p);
    }
    nll /= steps as f64;

    // Backward pass. Each token contributes weight/steps of its NLL.
    let scale = item.weight / steps as f64;
    let mut dh = vec![0.0; hdim];
    let mut dv = vec![0.0; hdim];
    for t in (0..steps).rev() {
        let state = &states[t];
        let tgt = item.target.as_slice()[t] as usize;
        let h_prev: Vec<f64> = if t == 0 {
            vec![0.0; hdim]
        } else {
            states[t - 1].h.clone()
        };

        // Output layer.
        let mut dlogits = probs[t].clone();
        dlogits[tgt] -= 1.0;
        for d in dlogits.iter_mut() {
            *d *= scale;
        }
        grads.out_w.add_outer(&dlogits, &state.h);
        for (g, d) in grads.out_b.iter_mut().zip(&dlogits) {
            *g += d;
        }
        for (dhi, add) in dh.iter_mut().zip(params.values.out_w.tmatvec(&dlogits)) {
            *dhi += add;
        }

        // Gated cell backward.
        let mut dz = vec![0.0; hdim];
        let mut dc = vec![0.0; hdim];
        let mut dh_prev = vec![0.0; hdim];
        for i in 0..hdim {
            dz[i] = dh[i] * (state.c[i] - h_prev[i]);
            dc[i] = dh[i] * state.z[i];
            dh_prev[i] = dh[i] * (1.0 - state.z[i]);
        }
        let da_c: Vec<f64> = (0..hdim)
            .map(|i| dc[i] * (1.0 - state.c[i] * state.c[i]))
            .collect();
        grads.cand_w.add_outer(&da_c, &state.xc);
        for (g, d) in grads.cand_b.iter_mut().zip(&da_c) {
            *g += d;
        }
        let dxc = params.values.cand_w.tmatvec(&da_c);

        let mut de = vec![0.0; edim];
        let mut dr = vec![0.0; hdim];
        for i in 0..hdim {
            dr[i] = dxc[i] * h_prev[i];
            dh_prev[i] += dxc[i] * state.r[i];
        }
        for i in 0..edim {
            de[i] += dxc[hdim + i];
        }
        for i in 0..hdim {
            dv[i] += dxc[hdim + edim + i];
        }

        let da_r: Vec<f64> = (0..hdim)
            .map(|i| dr[i] * state.r[i] * (1.0 - state.r[i]))
            .collect();
        grads.gate_r_w.add_outer(&da_r, &state.x);
        for (g, d) in grads.gate_r_b.iter_mut().zip(&da_r) {
            *g += d;
        }
        let da_z: Vec<f64> = (0..hdim)
            .map(|i| dz[i] * state.z[i] * (1.0 - state.z[i]))
            .collect();
        grads.gate_z_w.add_outer(&da_z, &state.x);
        for (g, d) in grads.gate_z_b.iter_mut().zip(&da_z) {
            *g += d;
        }

        let dx_z = params.values.gate_z_w.tmatvec(&da_z);
        let dx_r = params.values.gate_r_w.tmatvec(&da_r);
        for i in 0..hdim {
            dh_prev[i] += dx_z[i] + dx_r[i];
        }
        for i in 0..edim {
            de[i] += dx_z[hdim + i] + dx_r[hdim + i];
        }
        for i in 0..hdim {
            dv[i] += dx_z[hdim + edim + i] + dx_r[hdim + edim + i];
        }

        let emb_row = grads.emb.row_mut(prev_tokens[t] as usize);
        for (g, d) in emb_row.iter_mut().zip(&de) {
            *g += d;
        }
        dh = dh_prev;
    }

    // Encoder backward: v = tanh(enc_w * mean + enc_b).
    let da_enc: Vec<f64> = (0..hdim)
        .map(|i| dv[i] * (1.0 - enc.v[i] * enc.v[i]))
        .collect();
    grads.enc_w.add_outer(&da_enc, &enc.mean);
    for (g, d) in grads.enc_b.iter_mut().zip(&da_enc) {
        *g += d;
    }
    let dmean = params.values.enc_w.tmatvec(&da_enc);
    let inv_len = 1.0 / item.input.len() as f64;
    for &id in item.input.as_slice() {
        let emb_row = grads.emb.row_mut(id as usize);
        for (g, d) in emb_row.iter_mut().zip(&dmean) {
            *g += d * inv_len;
        }
    }
    Ok(nll)
}

/// AdamW hyperparameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// First/second moment accumulators plus the step counter.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub m: ParamValues,
    pub v: ParamValues,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(config: &ModelConfig) -> Self {
        OptimizerState {
            m: ParamValues::zeros(config),
            v: ParamValues::zeros(config),
            step: 0,
        }
    }
}

/// One decoupled-weight-decay Adam update with bias correction.
pub fn apply_update(
    params: &mut Parameters,
    grads: &ParamValues,
    state: &mut OptimizerState,
    hyper: &AdamHyper,
) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hyper.beta1.powi(t);
    let bc2 = 1.0 - hyper.beta2.powi(t);
    let decay = hyper.learning_rate * hyper.weight_decay;

    let mut p_blocks = params.values.slices_mut();
    let g_blocks = grads.slices();
    let mut m_blocks = state.m.slices_mut();
    let mut v_blocks = state.v.slices_mut();
    for b in 0..p_blocks.len() {
        let p = &mut p_blocks[b];
        let g = g_blocks[b];
        let m = &mut m_blocks[b];
        let v = &mut v_blocks[b];
        for i in 0..p.len() {
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            let step = hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
            p[i] = p[i] - decay * p[i] - step;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    config: ModelConfig,
    vocab: Vec<String>,
    values: ParamValues,
}

const CHECKPOINT_FORMAT: &str = "facetgen-checkpoint-v1";

/// Save parameters and the vocabulary they were trained against. The JSON
/// float encoding round-trips bit-exactly.
pub fn save_checkpoint(params: &Parameters, vocab: &Vocabulary, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        config: params.config.clone(),
        vocab: vocab.tokens().to_vec(),
        values: params.values.clone(),
    };
    let json = serde_json::to_string(&file)
        .map_err(|e| Error::Format(format!("checkpoint serialization: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(Parameters, Vec<String>)> {
    let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CheckpointFile =
        serde_json::from_str(&json).map_err(|e| Error::Format(format!("checkpoint parse: {e}")))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Format(format!(
            "unsupported checkpoint format {:?}",
            file.format
        )));
    }
    file.config.validate()?;
    Ok((
        Parameters {
            config: file.config,
            values: file.values,
        },
        file.vocab,
    ))
}

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::{TokenSequence, PADDING_ID};
use crate::{Error, Result};

pub const DEFAULT_EMBED_DIM: usize = 64;
pub const DEFAULT_HIDDEN_DIM: usize = 256;

const TOKEN_INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    SelfContained,
    EmbedToTags,
    EmbedToEmbed,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::SelfContained, Variant::EmbedToTags, Variant::EmbedToEmbed];

    /// Short name used on the command line and in files.
    pub const fn tag(self) -> &'static str {
        match self {
            Variant::SelfContained => "m1",
            Variant::EmbedToTags => "m2",
            Variant::EmbedToEmbed => "m3",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.tag() == tag)
    }

    pub const fn code(self) -> u8 {
        match self {
            Variant::SelfContained => 1,
            Variant::EmbedToTags => 2,
            Variant::EmbedToEmbed => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.code() == code)
    }

    pub const fn takes_tokens(self) -> bool {
        matches!(self, Variant::SelfContained)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Layer sizes of a model.
///
/// `input_dim` is the number of token ids (rows of the token table) for the
/// self-contained variant and the embedding dimension otherwise.
/// `embed_dim` is only used by the self-contained variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub variant: Variant,
    pub input_dim: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
}

impl ModelSpec {
    pub fn self_contained(token_count: usize, output_dim: usize) -> Self {
        ModelSpec {
            variant: Variant::SelfContained,
            input_dim: token_count,
            embed_dim: DEFAULT_EMBED_DIM,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            output_dim,
        }
    }

    pub fn embed_to_tags(embedding_dim: usize, output_dim: usize) -> Self {
        ModelSpec {
            variant: Variant::EmbedToTags,
            input_dim: embedding_dim,
            embed_dim: 0,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            output_dim,
        }
    }

    pub fn embed_to_embed(embedding_dim: usize, output_dim: usize) -> Self {
        ModelSpec {
            variant: Variant::EmbedToEmbed,
            input_dim: embedding_dim,
            embed_dim: 0,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            output_dim,
        }
    }

    pub fn with_hidden(mut self, hidden_dim: usize) -> Self {
        self.hidden_dim = hidden_dim;
        self
    }

    pub fn with_embed_dim(mut self, embed_dim: usize) -> Self {
        self.embed_dim = embed_dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let embed_ok = !self.variant.takes_tokens() || self.embed_dim > 0;
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 || !embed_ok {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        Ok(())
    }

    /// Width of the vector entering the hidden layer.
    pub fn dense_input_dim(&self) -> usize {
        if self.variant.takes_tokens() {
            self.embed_dim
        } else {
            self.input_dim
        }
    }

    fn layout(&self) -> Layout {
        let table = if self.variant.takes_tokens() {
            self.input_dim * self.embed_dim
        } else {
            0
        };
        let d = self.dense_input_dim();
        let w1 = table..table + d * self.hidden_dim;
        let b1 = w1.end..w1.end + self.hidden_dim;
        let w2 = b1.end..b1.end + self.hidden_dim * self.output_dim;
        let b2 = w2.end..w2.end + self.output_dim;
        Layout {
            table: 0..table,
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout().b2.end
    }
}

#[derive(Debug, Clone)]
struct Layout {
    table: Range<usize>,
    w1: Range<usize>,
    b1: Range<usize>,
    w2: Range<usize>,
    b2: Range<usize>,
}

/// Input to a model: token ids for the self-contained variant, a dense vector
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelInput {
    Tokens(TokenSequence),
    Dense(Vec<f64>),
}

/// Mean of squared differences.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch {
            context: "mse target",
            expected: pred.len(),
            actual: target.len(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

struct Trace {
    dense_in: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    output: Vec<f64>,
    /// Non-padding token ids, for the self-contained variant.
    tokens: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    params: Vec<f64>,
}

impl Model {
    /// Seeded initialization: dense weights uniform in `±1/sqrt(fan_in)`, zero
    /// biases, token table uniform in `±0.05`.
    pub fn init(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; spec.param_count()];
        for p in &mut params[layout.table.clone()] {
            *p = rng.random_range(-TOKEN_INIT_SCALE..TOKEN_INIT_SCALE);
        }
        let a1 = 1.0 / libm::sqrt(spec.dense_input_dim() as f64);
        for p in &mut params[layout.w1.clone()] {
            *p = rng.random_range(-a1..a1);
        }
        let a2 = 1.0 / libm::sqrt(spec.hidden_dim as f64);
        for p in &mut params[layout.w2.clone()] {
            *p = rng.random_range(-a2..a2);
        }
        Ok(Model { spec, params })
    }

    pub fn from_params(spec: ModelSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.param_count() {
            return Err(Error::DimensionMismatch {
                context: "model parameters",
                expected: spec.param_count(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite model parameter"));
        }
        Ok(Model { spec, params })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn dense_input(&self, input: &ModelInput) -> Result<(Vec<f64>, Vec<u32>)> {
        let spec = &self.spec;
        match (input, spec.variant.takes_tokens()) {
            (ModelInput::Tokens(seq), true) => {
                let tokens: Vec<u32> = seq.ids().iter().copied().filter(|&t| t != PADDING_ID).collect();
                let mut pooled = vec![0.0; spec.embed_dim];
                if let Some(&bad) = tokens.iter().find(|&&t| t as usize >= spec.input_dim) {
                    return Err(Error::DimensionMismatch {
                        context: "token id",
                        expected: spec.input_dim,
                        actual: bad as usize + 1,
                    });
                }
                if !tokens.is_empty() {
                    let table = &self.params[spec.layout().table];
                    for &t in &tokens {
                        let row = &table[t as usize * spec.embed_dim..][..spec.embed_dim];
                        pooled.iter_mut().zip(row).for_each(|(p, r)| *p += r);
                    }
                    let inv = 1.0 / tokens.len() as f64;
                    pooled.iter_mut().for_each(|p| *p *= inv);
                }
                Ok((pooled, tokens))
            }
            (ModelInput::Dense(x), false) => {
                if x.len() != spec.input_dim {
                    return Err(Error::DimensionMismatch {
                        context: "model input",
                        expected: spec.input_dim,
                        actual: x.len(),
                    });
                }
                Ok((x.clone(), Vec::new()))
            }
            (_, takes_tokens) => Err(Error::WrongVariant {
                expected: if takes_tokens { "token input" } else { "dense input" },
                actual: spec.variant.tag(),
            }),
        }
    }

    fn trace(&self, input: &ModelInput) -> Result<Trace> {
        let spec = &self.spec;
        let layout = spec.layout();
        let (dense_in, tokens) = self.dense_input(input)?;
        let (h, o) = (spec.hidden_dim, spec.output_dim);

        let mut hidden_pre = self.params[layout.b1.clone()].to_vec();
        let w1 = &self.params[layout.w1];
        for (i, &x) in dense_in.iter().enumerate() {
            if x != 0.0 {
                let row = &w1[i * h..][..h];
                hidden_pre.iter_mut().zip(row).for_each(|(z, w)| *z += x * w);
            }
        }
        let hidden: Vec<f64> = hidden_pre.iter().map(|&z| z.max(0.0)).collect();

        let mut output = self.params[layout.b2.clone()].to_vec();
        let w2 = &self.params[layout.w2];
        for (j, &a) in hidden.iter().enumerate() {
            if a != 0.0 {
                let row = &w2[j * o..][..o];
                output.iter_mut().zip(row).for_each(|(y, w)| *y += a * w);
            }
        }
        Ok(Trace {
            dense_in,
            hidden_pre,
            hidden,
            output,
            tokens,
        })
    }

    /// Raw (linear) network output.
    pub fn forward(&self, input: &ModelInput) -> Result<Vec<f64>> {
        Ok(self.trace(input)?.output)
    }

    /// Loss and exact gradient of `mse_loss(forward(input), target)` with
    /// respect to every parameter, in parameter order.
    pub fn backward(&self, input: &ModelInput, target: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut grads = vec![0.0; self.params.len()];
        let loss = self.accumulate_gradients(input, target, 1.0, &mut grads)?;
        Ok((loss, grads))
    }

    /// Adds `scale * d(loss)/d(params)` into `grads` and returns the loss.
    pub fn accumulate_gradients(
        &self,
        input: &ModelInput,
        target: &[f64],
        scale: f64,
        grads: &mut [f64],
    ) -> Result<f64> {
        let spec = &self.spec;
        if grads.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                context: "gradient buffer",
                expected: self.params.len(),
                actual: grads.len(),
            });
        }
        let trace = self.trace(input)?;
        let loss = mse_loss(&trace.output, target)?;
        let layout = spec.layout();
        let (h, o) = (spec.hidden_dim, spec.output_dim);

        let k = scale * 2.0 / o as f64;
        let d_out: Vec<f64> = trace.output.iter().zip(target).map(|(y, t)| k * (y - t)).collect();

        grads[layout.b2.clone()].iter_mut().zip(&d_out).for_each(|(g, d)| *g += d);
        let w2 = &self.params[layout.w2.clone()];
        let mut d_hidden = vec![0.0; h];
        {
            let gw2 = &mut grads[layout.w2.clone()];
            for (j, &a) in trace.hidden.iter().enumerate() {
                if trace.hidden_pre[j] <= 0.0 {
                    continue;
                }
                let row = &w2[j * o..][..o];
                d_hidden[j] = row.iter().zip(&d_out).map(|(w, d)| w * d).sum();
                if a != 0.0 {
                    gw2[j * o..][..o].iter_mut().zip(&d_out).for_each(|(g, d)| *g += a * d);
                }
            }
        }
        // d_hidden is already masked by the ReLU derivative
        grads[layout.b1.clone()].iter_mut().zip(&d_hidden).for_each(|(g, d)| *g += d);
        let w1 = &self.params[layout.w1.clone()];
        let mut d_in = if spec.variant.takes_tokens() {
            vec![0.0; trace.dense_in.len()]
        } else {
            Vec::new()
        };
        {
            let gw1 = &mut grads[layout.w1.clone()];
            for (i, &x) in trace.dense_in.iter().enumerate() {
                if x != 0.0 {
                    gw1[i * h..][..h].iter_mut().zip(&d_hidden).for_each(|(g, d)| *g += x * d);
                }
                if !d_in.is_empty() {
                    d_in[i] = w1[i * h..][..h].iter().zip(&d_hidden).map(|(w, d)| w * d).sum();
                }
            }
        }
        if !trace.tokens.is_empty() {
            let e = spec.embed_dim;
            let inv = 1.0 / trace.tokens.len() as f64;
            let table = &mut grads[layout.table];
            for &t in &trace.tokens {
                table[t as usize * e..][..e].iter_mut().zip(&d_in).for_each(|(g, d)| *g += inv * d);
            }
        }
        Ok(loss)
    }
}

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::steering::SteeringConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FORMAT_TAG: &str = "toynet";
const FORMAT_VERSION: &str = "v1";

/// Address of one hidden ("FFN") unit: 0-based layer and unit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeuronId {
    pub layer: usize,
    pub unit: usize,
}

impl NeuronId {
    pub const fn new(layer: usize, unit: usize) -> Self {
        Self { layer, unit }
    }
}

impl std::fmt::Display for NeuronId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.layer, self.unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Relu,
}

impl Nonlinearity {
    fn tag(self) -> &'static str {
        match self {
            Nonlinearity::Relu => "relu",
        }
    }

    #[inline]
    fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            // never produces -0.0
            Nonlinearity::Relu => {
                if x > T::zero() {
                    x
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Dense layer `h = act(W x + b)` with `W` stored row-major, one row per
/// output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<T>,
    bias: Vec<T>,
    nonlinearity: Nonlinearity,
}

impl<T: Scalar> Layer<T> {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidInput("layer dimensions must be positive".into()));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::InvalidInput(format!(
                "weight matrix has {} entries, expected {out_dim}x{in_dim}",
                weights.len()
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::InvalidInput(format!(
                "bias has {} entries, expected {out_dim}",
                bias.len()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
            nonlinearity: Nonlinearity::Relu,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weight(&self, unit: usize, input: usize) -> T {
        self.weights[unit * self.in_dim + input]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    /// Post-nonlinearity activation of every unit. Each pre-activation is
    /// accumulated as `b_i + w_i0 x_0 + w_i1 x_1 + ...` in input order.
    fn activate(&self, x: &[T]) -> Vec<T> {
        self.weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, &b)| {
                let pre = row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi);
                self.nonlinearity.apply(pre)
            })
            .collect()
    }
}

/// Output of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations<T> {
    /// Post-nonlinearity (and post-steering) activations, one vector per layer.
    pub hidden: Vec<Vec<T>>,
}

impl<T> Activations<T> {
    /// The final layer's activations.
    pub fn output(&self) -> &[T] {
        self.hidden.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn get(&self, id: NeuronId) -> Option<&T> {
        self.hidden.get(id.layer).and_then(|l| l.get(id.unit))
    }
}

/// Stack of rectifier layers standing in for a transformer's FFN blocks. The
/// network's output is the last layer's activation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyNetwork<T> {
    input_dim: usize,
    layers: Vec<Layer<T>>,
    seed: Option<u64>,
}

impl<T: Scalar> ToyNetwork<T> {
    pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];
    pub const INIT_RANGE: f64 = 0.5;

    pub fn new(input_dim: usize, layers: Vec<Layer<T>>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidInput("input dimension must be positive".into()));
        }
        if layers.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        let mut prev = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim != prev {
                return Err(Error::InvalidInput(format!(
                    "layer {i} expects {} inputs but receives {prev}",
                    layer.in_dim
                )));
            }
            prev = layer.out_dim;
        }
        Ok(Self {
            input_dim,
            layers,
            seed: None,
        })
    }

    /// Weights and biases drawn uniformly from `[-0.5, 0.5]` with a ChaCha8
    /// stream seeded by `seed`.
    pub fn seeded(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len());
        let mut prev = input_dim;
        for &width in hidden {
            let mut draw = |n: usize| -> Vec<T> {
                (0..n)
                    .map(|_| T::lit(rng.gen_range(-Self::INIT_RANGE..=Self::INIT_RANGE)))
                    .collect()
            };
            let weights = draw(prev * width);
            let bias = draw(width);
            layers.push(Layer::new(prev, width, weights, bias)?);
            prev = width;
        }
        let mut net = Self::new(input_dim, layers)?;
        net.seed = Some(seed);
        Ok(net)
    }

    /// Two 64-unit rectifier layers.
    pub fn default_seeded(input_dim: usize, seed: u64) -> Result<Self> {
        Self::seeded(input_dim, &Self::DEFAULT_HIDDEN, seed)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::out_dim).collect()
    }

    pub fn contains(&self, id: NeuronId) -> bool {
        self.layers
            .get(id.layer)
            .is_some_and(|l| id.unit < l.out_dim)
    }

    /// Every hidden unit in (layer, unit) order.
    pub fn neurons(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.out_dim).map(move |u| NeuronId::new(l, u)))
    }

    pub fn neuron_count(&self) -> usize {
        self.layers.iter().map(Layer::out_dim).sum()
    }

    /// Runs the network, optionally steering each hidden unit before its
    /// value reaches the next layer. Weights are never touched.
    pub fn forward(
        &self,
        input: &[T],
        steering: Option<&SteeringConfig<'_, T>>,
    ) -> Result<Activations<T>> {
        if input.len() != self.input_dim {
            return Err(Error::InvalidInput(format!(
                "input has length {}, network expects {}",
                input.len(),
                self.input_dim
            )));
        }
        if let Some(cfg) = steering {
            cfg.validate_against(self)?;
        }
        let mut hidden: Vec<Vec<T>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let x = hidden.last().map(Vec::as_slice).unwrap_or(input);
            let mut h = layer.activate(x);
            if let Some(cfg) = steering {
                for (u, v) in h.iter_mut().enumerate() {
                    *v = cfg.apply(*v, NeuronId::new(l, u));
                }
            }
            hidden.push(h);
        }
        Ok(Activations { hidden })
    }

    /// Plain-text serialization:
    ///
    /// ```text
    /// toynet v1 <input_dim> <layer_count> <seed|none>
    /// layer <out_dim> <in_dim> relu
    /// <row 0: in_dim weights>
    /// ...
    /// bias <out_dim values>
    /// ```
    ///
    /// Values use shortest round-trip decimal notation, so parsing the text
    /// reproduces the network exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "{FORMAT_TAG} {FORMAT_VERSION} {} {} {seed}",
            self.input_dim,
            self.layers.len()
        );
        for layer in &self.layers {
            let _ = writeln!(
                out,
                "layer {} {} {}",
                layer.out_dim,
                layer.in_dim,
                layer.nonlinearity.tag()
            );
            for row in layer.weights.chunks_exact(layer.in_dim) {
                out.push_str(&join(row));
                out.push('\n');
            }
            out.push_str("bias ");
            out.push_str(&join(&layer.bias));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let loc = |n: usize| format!("network line {n}");

        let (n, header) = lines
            .next()
            .ok_or_else(|| Error::parse("network", "empty network file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 5 || head[0] != FORMAT_TAG || head[1] != FORMAT_VERSION {
            return Err(Error::parse(
                loc(n),
                format!("expected `{FORMAT_TAG} {FORMAT_VERSION} <input> <layers> <seed>`"),
            ));
        }
        let input_dim: usize = parse_tok(head[2], &loc(n))?;
        let layer_count: usize = parse_tok(head[3], &loc(n))?;
        let seed = match head[4] {
            "none" => None,
            s => Some(parse_tok::<u64>(s, &loc(n))?),
        };

        let mut layers = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            let (n, spec) = lines
                .next()
                .ok_or_else(|| Error::parse("network", "truncated: missing layer header"))?;
            let spec: Vec<&str> = spec.split_whitespace().collect();
            if spec.len() != 4 || spec[0] != "layer" || spec[3] != "relu" {
                return Err(Error::parse(loc(n), "expected `layer <out> <in> relu`"));
            }
            let out_dim: usize = parse_tok(spec[1], &loc(n))?;
            let in_dim: usize = parse_tok(spec[2], &loc(n))?;
            let mut weights = Vec::with_capacity(out_dim * in_dim);
            for _ in 0..out_dim {
                let (n, row) = lines
                    .next()
                    .ok_or_else(|| Error::parse("network", "truncated weight matrix"))?;
                let row: Vec<T> = parse_row(row, &loc(n))?;
                if row.len() != in_dim {
                    return Err(Error::parse(
                        loc(n),
                        format!("weight row has {} values, expected {in_dim}", row.len()),
                    ));
                }
                weights.extend(row);
            }
            let (n, bias) = lines
                .next()
                .ok_or_else(|| Error::parse("network", "truncated: missing bias"))?;
            let bias = bias
                .strip_prefix("bias")
                .ok_or_else(|| Error::parse(loc(n), "expected `bias ...`"))?;
            let bias: Vec<T> = parse_row(bias, &loc(n))?;
            layers.push(Layer::new(in_dim, out_dim, weights, bias)?);
        }
        if let Some((n, _)) = lines.next() {
            return Err(Error::parse(loc(n), "trailing content after last layer"));
        }
        Ok(Self::new(input_dim, layers)?.with_seed(seed))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn join<T: Scalar>(values: &[T]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn parse_tok<F: std::str::FromStr>(tok: &str, locator: &str) -> Result<F> {
    tok.parse()
        .map_err(|_| Error::parse(locator, format!("cannot parse {tok:?}")))
}

/// Whitespace-separated reals.
pub(crate) fn parse_row<T: Scalar>(line: &str, locator: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| parse_tok(tok, locator))
        .collect()
}

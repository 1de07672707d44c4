//! TOML configuration. Unknown keys are errors; every semantic error is
//! reported with the line and column of the offending value.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use lcm_kms::kms::TraceSpec;
use lcm_kms::scale::{int, parse_rational};
use lcm_kms::{Element, Monoid, Scale};
use num_rational::BigRational;
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    monoid: Spanned<toml::Table>,
    /// Generator name → weight, as `"p/q"` or an integer.
    #[serde(default)]
    scale: BTreeMap<String, Spanned<Number>>,
    #[serde(default)]
    beta: Vec<Spanned<f64>>,
    #[serde(default)]
    cutoffs: RawCutoffs,
    #[serde(default)]
    traces: Vec<Spanned<TraceSpec>>,
    /// `[s, t]` pairs for `kms-eval`.
    #[serde(default)]
    pairs: Vec<Spanned<[String; 2]>>,
    /// Candidate foundation sets for the boundary residual.
    #[serde(default)]
    boundary: Vec<Spanned<Vec<String>>>,
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCutoffs {
    class_cutoff: Option<Spanned<Number>>,
    existence_cutoff: Option<Spanned<Number>>,
    max_antichain: Option<usize>,
    subset_budget: Option<u64>,
    depth: Option<usize>,
    ladder_height: Option<usize>,
    kernel_sample: Option<usize>,
    samples: Option<usize>,
}

/// An integer or a string in `p/q` or `b^e` form.
#[derive(Debug)]
enum Number {
    Int(u64),
    Text(String),
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Number;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive integer or a string such as \"3/2\" or \"2^40\"")
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Number, E> {
                u64::try_from(v)
                    .map(Number::Int)
                    .map_err(|_| E::custom("negative number"))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number::Int(v))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Number, E> {
                Ok(Number::Text(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

/// Parses `"p/q"`, an integer, or a power `"b^e"`.
pub fn parse_number(text: &str) -> Result<BigRational, String> {
    if let Some((b, e)) = text.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| format!("bad base in `{text}`"))?;
        let e: usize = e.trim().parse().map_err(|_| format!("bad exponent in `{text}`"))?;
        return Ok(num_traits::pow(int(b), e));
    }
    parse_rational(text).map_err(|e| e.to_string())
}

impl Number {
    fn value(&self) -> Result<BigRational, String> {
        match self {
            Number::Int(n) => Ok(int(*n)),
            Number::Text(t) => parse_number(t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub scale: Scale,
    pub betas: Vec<f64>,
    /// Class cutoff for partition functions and finite-type states.
    pub class_cutoff: BigRational,
    /// Class cutoff for the existence certificate and foundation probes.
    pub existence_cutoff: BigRational,
    pub max_antichain: usize,
    pub subset_budget: u64,
    /// Word length for admissibility scans and the `B^{a,b}` search.
    pub depth: usize,
    pub ladder_height: usize,
    pub kernel_sample: usize,
    /// Sampled monomial pairs for the KMS residual diagnostic.
    pub samples: usize,
    pub traces: Vec<TraceSpec>,
    pub pairs: Vec<(Element, Element)>,
    pub boundary: Vec<Vec<Element>>,
    pub output: Option<PathBuf>,
}

/// A configuration error, rendered as `path:line:column: message`.
#[derive(Debug)]
pub struct ConfigError(pub String);

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn at(&self, span: Range<usize>, message: impl std::fmt::Display) -> ConfigError {
        let before = &self.text[..span.start.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        ConfigError(format!("{}:{line}:{column}: {message}", self.path.display()))
    }
}

fn default_class_cutoff(m: &Monoid) -> BigRational {
    match m {
        Monoid::AxB { .. } => int(10_000),
        Monoid::C3 | Monoid::Lamplighter => num_traits::pow(int(2), 40),
        Monoid::FreeMonoid { .. } | Monoid::FreeAbelian { .. } => int(1 << 12),
    }
}

fn default_ladder_height(m: &Monoid) -> usize {
    match m {
        Monoid::AxB { .. } => 8,
        Monoid::Lamplighter => 6,
        _ => 4,
    }
}

fn default_kernel_sample(m: &Monoid) -> usize {
    match m {
        Monoid::AxB { .. } | Monoid::C3 => 10,
        _ => 4,
    }
}

pub fn default_trace(m: &Monoid) -> TraceSpec {
    match m {
        Monoid::Lamplighter => TraceSpec::LampCharacter { signs: Vec::new() },
        _ => TraceSpec::Character { z: [1.0, 0.0] },
    }
}

/// The family table; unit families take no parameters, which serde alone
/// would not enforce.
fn family(table: &Spanned<toml::Table>) -> Result<Monoid, String> {
    let t = table.get_ref();
    let allowed: &[&str] = match t.get("family").and_then(|f| f.as_str()) {
        Some("free_monoid") => &["family", "alphabet"],
        Some("free_abelian") => &["family", "rank"],
        Some("axb") => &["family", "primes"],
        _ => &["family"],
    };
    if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(format!("unknown field `{k}` for this family"));
    }
    toml::Value::Table(t.clone()).try_into().map_err(|e: toml::de::Error| e.message().to_string())
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Config, ConfigError> {
    let src = Source { path, text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => src.at(span, e.message()),
        None => ConfigError(format!("{}: {}", path.display(), e.message())),
    })?;

    let monoid = family(&raw.monoid).map_err(|m| src.at(raw.monoid.span(), m))?;
    let mut overrides = Vec::new();
    for (name, w) in &raw.scale {
        let value = w.get_ref().value().map_err(|m| src.at(w.span(), m))?;
        overrides.push((name.as_str(), value, w.span()));
    }
    let pairs: Vec<(&str, BigRational)> =
        overrides.iter().map(|(n, v, _)| (*n, v.clone())).collect();
    let scale = Scale::new(monoid.clone(), &pairs).map_err(|e| {
        // point at the weight that is named in the message, else at the family
        let msg = e.to_string();
        let named = |n: &str| msg.contains(&format!("`{n}`")) || n.len() > 1 && msg.contains(n);
        let span = overrides
            .iter()
            .find(|(n, _, _)| named(n))
            .map(|o| o.2.clone())
            .unwrap_or_else(|| raw.monoid.span());
        src.at(span, e)
    })?;

    let mut betas = Vec::new();
    for b in &raw.beta {
        if b.get_ref().is_nan() {
            return Err(src.at(b.span(), "β must be a number"));
        }
        betas.push(*b.get_ref());
    }

    let c = &raw.cutoffs;
    let number = |n: &Option<Spanned<Number>>, default: BigRational| match n {
        Some(n) => {
            let v = n.get_ref().value().map_err(|m| src.at(n.span(), m))?;
            if v < int(1) {
                return Err(src.at(n.span(), "cutoff must be at least 1"));
            }
            Ok(v)
        }
        None => Ok(default),
    };
    let class_cutoff = number(&c.class_cutoff, default_class_cutoff(&monoid))?;
    let existence_cutoff = number(&c.existence_cutoff, int(16))?;

    let mut traces = Vec::new();
    for t in &raw.traces {
        t.get_ref().validate().map_err(|e| src.at(t.span(), e))?;
        let compatible = matches!(
            (&monoid, t.get_ref()),
            (Monoid::Lamplighter, TraceSpec::LampCharacter { .. })
        ) || !matches!(monoid, Monoid::Lamplighter)
            && !matches!(t.get_ref(), TraceSpec::LampCharacter { .. });
        if !compatible {
            return Err(src.at(t.span(), format!("trace type does not fit the {} kernel", monoid.name())));
        }
        traces.push(t.get_ref().clone());
    }
    if traces.is_empty() {
        traces.push(default_trace(&monoid));
    }

    let element = |text: &str, span: Range<usize>| monoid.parse(text).map_err(|e| src.at(span, e));
    let mut state_pairs = Vec::new();
    for p in &raw.pairs {
        let [s, t] = p.get_ref();
        state_pairs.push((element(s, p.span())?, element(t, p.span())?));
    }
    let mut boundary = Vec::new();
    for set in &raw.boundary {
        if set.get_ref().is_empty() {
            return Err(src.at(set.span(), "empty boundary set"));
        }
        boundary.push(
            set.get_ref()
                .iter()
                .map(|s| element(s, set.span()))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }

    Ok(Config {
        betas,
        class_cutoff,
        existence_cutoff,
        max_antichain: c.max_antichain.unwrap_or(4),
        subset_budget: c.subset_budget.unwrap_or(100_000_000),
        depth: c.depth.unwrap_or(3),
        ladder_height: c.ladder_height.unwrap_or(default_ladder_height(&monoid)),
        kernel_sample: c.kernel_sample.unwrap_or(default_kernel_sample(&monoid)),
        samples: c.samples.unwrap_or(20),
        traces,
        pairs: state_pairs,
        boundary,
        output: raw.output,
        scale,
    })
}

//! Experiment configuration and schema validation.

use kobacore::domains::{Domain, DomainFamily, DomainOracle};
use kobacore::hilbert::BodySpec;
use kobacore::paths::GeodesicSettings;
use kobacore::{CPoint, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::PathBuf;

/// Complex point as `[[re, im], …]`.
pub type JsonPoint = Vec<[f64; 2]>;

pub fn to_cpoint(p: &JsonPoint) -> CPoint {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    /// Four-point scan on a domain.
    Probe(ProbeConfig),
    /// Optimized curve between two points.
    Geodesic(GeodesicConfig),
    /// Certified distance intervals for point pairs.
    Sandwich(SandwichConfig),
    /// Four-point scan under a Hilbert metric.
    Hilbert(HilbertConfig),
    /// Local Hausdorff and metric drift along a domain sequence.
    Converge(ConvergeConfig),
    /// Boundary divergence or flat shadowing along normal rays.
    Flats(FlatsConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    pub quadruples: usize,
    #[serde(default = "yes")]
    pub planted: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    /// Closed form on model domains, surrogate elsewhere.
    #[default]
    Auto,
    Exact,
    /// `k̂`-length of an optimized curve.
    Surrogate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub domain: DomainFamily,
    pub sampler: SamplerSettings,
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub metric: MetricChoice,
    #[serde(default)]
    pub geodesic: GeodesicSettings,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub domain: DomainFamily,
    pub p: JsonPoint,
    pub q: JsonPoint,
    #[serde(default)]
    pub geodesic: GeodesicSettings,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    pub domain: DomainFamily,
    pub pairs: Vec<[JsonPoint; 2]>,
    #[serde(default)]
    pub geodesic: GeodesicSettings,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertConfig {
    pub body: BodySpec,
    pub sampler: SamplerSettings,
    pub schedule: Vec<f64>,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    /// Rescaled by `g_t` for each `t` in `schedule`.
    #[serde(default)]
    pub domain: Option<DomainFamily>,
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
    /// Explicit sequence, used instead of `domain` and `schedule`.
    #[serde(default)]
    pub sequence: Option<Vec<DomainFamily>>,
    pub limit: DomainFamily,
    pub radius: f64,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub pairs: Vec<[JsonPoint; 2]>,
    /// `(p, v)` for `k̂(p; v)`.
    #[serde(default)]
    pub tangents: Vec<[JsonPoint; 2]>,
    #[serde(default)]
    pub geodesic: GeodesicSettings,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatsProbe {
    Divergence,
    Shadowing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatsConfig {
    pub domain: DomainFamily,
    pub x: JsonPoint,
    pub y: JsonPoint,
    pub schedule: Vec<f64>,
    pub probe: FlatsProbe,
    #[serde(default)]
    pub geodesic: GeodesicSettings,
    pub seed: u64,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Probe(_) => "probe",
            ExperimentConfig::Geodesic(_) => "geodesic",
            ExperimentConfig::Sandwich(_) => "sandwich",
            ExperimentConfig::Hilbert(_) => "hilbert",
            ExperimentConfig::Converge(_) => "converge",
            ExperimentConfig::Flats(_) => "flats",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::Probe(c) => c.seed,
            ExperimentConfig::Geodesic(c) => c.seed,
            ExperimentConfig::Sandwich(c) => c.seed,
            ExperimentConfig::Hilbert(c) => c.seed,
            ExperimentConfig::Converge(c) => c.seed,
            ExperimentConfig::Flats(c) => c.seed,
        }
    }

    pub fn output(&self) -> &PathBuf {
        match self {
            ExperimentConfig::Probe(c) => &c.output,
            ExperimentConfig::Geodesic(c) => &c.output,
            ExperimentConfig::Sandwich(c) => &c.output,
            ExperimentConfig::Hilbert(c) => &c.output,
            ExperimentConfig::Converge(c) => &c.output,
            ExperimentConfig::Flats(c) => &c.output,
        }
    }

    pub fn set_output(&mut self, path: PathBuf) {
        match self {
            ExperimentConfig::Probe(c) => c.output = path,
            ExperimentConfig::Geodesic(c) => c.output = path,
            ExperimentConfig::Sandwich(c) => c.output = path,
            ExperimentConfig::Hilbert(c) => c.output = path,
            ExperimentConfig::Converge(c) => c.output = path,
            ExperimentConfig::Flats(c) => c.output = path,
        }
    }
}

const SCHEDULE_MSG: &str = "schedule strictly increasing: entries must be positive, finite and strictly increasing";

fn check_schedule(name: &str, s: &[f64], errors: &mut Vec<String>) {
    let ok = !s.is_empty() && s.iter().all(|x| x.is_finite() && *x > 0.0) && s.windows(2).all(|w| w[1] > w[0]);
    if !ok {
        errors.push(format!("{name}: {SCHEDULE_MSG}"));
    }
}

fn unknown_families(v: &Value, path: &str, errors: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            if let Some(Value::String(f)) = map.get("family") {
                if !DomainFamily::SUPPORTED.contains(&f.as_str()) {
                    errors.push(format!("{path}: unknown family \"{f}\"; supported families: {}", DomainFamily::SUPPORTED.join(", ")));
                }
            }
            for (k, child) in map {
                unknown_families(child, &format!("{path}.{k}"), errors);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                unknown_families(child, &format!("{path}[{i}]"), errors);
            }
        }
        _ => {}
    }
}

fn build_domain(name: &str, f: &DomainFamily, errors: &mut Vec<String>) -> Option<Domain> {
    match f.build() {
        Ok(d) => Some(d),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    }
}

fn check_point(name: &str, dom: &Domain, p: &JsonPoint, interior: bool, errors: &mut Vec<String>) {
    if p.len() != dom.dim() {
        errors.push(format!("{name}: expected {} complex coordinates, found {}", dom.dim(), p.len()));
    } else if p.iter().flatten().any(|x| !x.is_finite()) {
        errors.push(format!("{name}: coordinates must be finite"));
    } else if interior && !dom.contains(&to_cpoint(p)) {
        errors.push(format!("{name}: point is not interior to the domain"));
    }
}

fn check_geodesic(g: &GeodesicSettings, errors: &mut Vec<String>) {
    if g.nodes < 3 || g.max_nodes < g.nodes || g.max_sweeps == 0 || g.golden_iters == 0 || g.directions == 0 || !(g.sweep_tol >= 0.0) {
        errors.push("geodesic: need nodes >= 3, max_nodes >= nodes, and positive sweeps, golden_iters and directions".into());
    }
}

fn check_sampler(s: &SamplerSettings, errors: &mut Vec<String>) {
    if s.quadruples == 0 {
        errors.push("sampler.quadruples: must be at least 1".into());
    }
}

fn is_unit_model(dom: &Domain) -> bool {
    match dom {
        Domain::Ball { radius, .. } => *radius == 1.0,
        Domain::Polydisc { radii } => radii.iter().all(|r| *r == 1.0),
        Domain::Epigraph(_) => true,
        _ => false,
    }
}

fn is_model(dom: &Domain) -> bool {
    matches!(dom, Domain::Ball { .. } | Domain::Polydisc { .. } | Domain::HalfPlane { .. })
}

fn semantic_checks(cfg: &ExperimentConfig, errors: &mut Vec<String>) {
    match cfg {
        ExperimentConfig::Probe(c) => {
            check_schedule("schedule", &c.schedule, errors);
            check_sampler(&c.sampler, errors);
            check_geodesic(&c.geodesic, errors);
            if let Some(dom) = build_domain("domain", &c.domain, errors) {
                if !is_unit_model(&dom) {
                    errors.push("domain: probe samplers exist for the unit ball, the unit polydisc and epigraphs".into());
                }
                if c.metric == MetricChoice::Exact && !is_model(&dom) {
                    errors.push("metric: exact distances exist for ball, polydisc and half-plane only".into());
                }
            }
        }
        ExperimentConfig::Geodesic(c) => {
            check_geodesic(&c.geodesic, errors);
            if let Some(dom) = build_domain("domain", &c.domain, errors) {
                check_point("p", &dom, &c.p, true, errors);
                check_point("q", &dom, &c.q, true, errors);
            }
        }
        ExperimentConfig::Sandwich(c) => {
            check_geodesic(&c.geodesic, errors);
            if c.pairs.is_empty() {
                errors.push("pairs: need at least one pair".into());
            }
            if let Some(dom) = build_domain("domain", &c.domain, errors) {
                for (i, [p, q]) in c.pairs.iter().enumerate() {
                    check_point(&format!("pairs[{i}][0]"), &dom, p, true, errors);
                    check_point(&format!("pairs[{i}][1]"), &dom, q, true, errors);
                }
            }
        }
        ExperimentConfig::Hilbert(c) => {
            check_schedule("schedule", &c.schedule, errors);
            check_sampler(&c.sampler, errors);
            if let Err(e) = c.body.build() {
                errors.push(format!("body: {e}"));
            }
        }
        ExperimentConfig::Converge(c) => {
            check_geodesic(&c.geodesic, errors);
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                errors.push("radius: must be positive".into());
            }
            if c.resolution.is_some_and(|n| n < 2) {
                errors.push("resolution: must be at least 2".into());
            }
            let limit = build_domain("limit", &c.limit, errors);
            let members: Vec<Domain> = match (&c.domain, &c.schedule, &c.sequence) {
                (Some(d), Some(s), None) => {
                    check_schedule("schedule", s, errors);
                    let base = build_domain("domain", d, errors);
                    if base.as_ref().is_some_and(|b| b.scaling_weights().is_none()) {
                        errors.push("domain: family carries no scaling group".into());
                    }
                    base.into_iter().collect()
                }
                (None, None, Some(seq)) if !seq.is_empty() => {
                    seq.iter().enumerate().filter_map(|(i, f)| build_domain(&format!("sequence[{i}]"), f, errors)).collect()
                }
                _ => {
                    errors.push("converge: give either domain with schedule, or a non-empty sequence".into());
                    Vec::new()
                }
            };
            if let Some(lim) = &limit {
                if members.iter().any(|m| m.dim() != lim.dim()) {
                    errors.push("limit: dimension differs from the sequence".into());
                }
                for (i, [p, q]) in c.pairs.iter().enumerate() {
                    check_point(&format!("pairs[{i}][0]"), lim, p, true, errors);
                    check_point(&format!("pairs[{i}][1]"), lim, q, true, errors);
                }
                for (i, [p, v]) in c.tangents.iter().enumerate() {
                    check_point(&format!("tangents[{i}][0]"), lim, p, true, errors);
                    check_point(&format!("tangents[{i}][1]"), lim, v, false, errors);
                }
            }
        }
        ExperimentConfig::Flats(c) => {
            check_schedule("schedule", &c.schedule, errors);
            check_geodesic(&c.geodesic, errors);
            if let Some(dom) = build_domain("domain", &c.domain, errors) {
                check_point("x", &dom, &c.x, false, errors);
                check_point("y", &dom, &c.y, false, errors);
            }
        }
    }
}

/// Schema and parameter checks without computation.
pub fn validate_value(v: &Value) -> Result<ExperimentConfig, Vec<String>> {
    let mut errors = Vec::new();
    unknown_families(v, "$", &mut errors);
    if !errors.is_empty() {
        return Err(errors);
    }
    let cfg: ExperimentConfig = match serde_json::from_value(v.clone()) {
        Ok(c) => c,
        Err(e) => return Err(vec![e.to_string()]),
    };
    semantic_checks(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Parses and validates a JSON config text.
pub fn validate_str(text: &str) -> Result<(Value, ExperimentConfig), Vec<String>> {
    let v: Value = serde_json::from_str(text).map_err(|e| vec![format!("malformed JSON: {e}")])?;
    let cfg = validate_value(&v)?;
    Ok((v, cfg))
}

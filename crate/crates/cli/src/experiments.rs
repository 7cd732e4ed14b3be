//! Dispatch from configs to the numerical modules.

use crate::config::*;
use kobacore::convergence::{local_hausdorff, metric_convergence_probe, rescaled_family};
use kobacore::domains::{Domain, DomainOracle};
use kobacore::hilbert::{hilbert_four_point_scan, BodySampler};
use kobacore::hyperbolicity::{
    boundary_divergence_probe, flat_shadowing_probe, try_four_point_scan, verdict, BallSphereSampler, FourPointReport,
    HomogeneousTemplateSampler, PolydiscSampler, QuadrupleSampler, Thresholds,
};
use kobacore::metric::{curve_length_upper, distance_interval, distance_upper, exact_distance};
use kobacore::paths::{optimize_geodesic, GeodesicSettings, PolyCurve};
use kobacore::{CPoint, GeomError, Result};
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    /// Numbers carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Result table plus a JSON summary for the manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub table: Table,
    pub summary: Value,
}

fn with_seed(g: &GeodesicSettings, seed: u64) -> GeodesicSettings {
    GeodesicSettings { seed, ..g.clone() }
}

fn scan_table(report: &FourPointReport, estimator: &str) -> Result<(Table, Value)> {
    let width = report.witness.first().map_or(0, |w| w[0].len());
    let mut header = vec!["scale".to_string(), "delta".to_string()];
    for k in 0..4 {
        header.extend((0..width).map(|j| format!("w{k}_{j}")));
    }
    header.extend(["metric_used", "estimator", "seed", "quadruples"].map(String::from));
    let rows = report
        .scale_schedule
        .iter()
        .zip(&report.delta_per_scale)
        .zip(&report.witness)
        .map(|((s, d), w)| {
            let mut row = vec![Cell::Num(*s), Cell::Num(*d)];
            row.extend(w.iter().flatten().map(|x| Cell::Num(*x)));
            row.extend([text(&report.metric_used), text(estimator), Cell::Int(report.seed), Cell::Int(report.quadruples_per_scale as u64)]);
            row
        })
        .collect();
    let v = verdict(report, Thresholds::default())?;
    let summary = json!({
        "verdict": v.verdict.as_str(),
        "growth_ratio": v.growth_ratio,
        "slope_per_doubling": v.slope_per_doubling,
        "thresholds": v.thresholds,
    });
    Ok((Table { header, rows }, summary))
}

fn domain_scan<S: QuadrupleSampler<Point = CPoint>>(dom: &Domain, sampler: &S, c: &ProbeConfig, exact: bool) -> Result<FourPointReport> {
    let n = c.sampler.quadruples;
    if exact {
        try_four_point_scan(|a, b| exact_distance(dom, a, b), sampler, &c.schedule, n, c.seed, "exact")
    } else {
        let g = with_seed(&c.geodesic, c.seed);
        try_four_point_scan(|a, b| distance_upper(dom, a, b, &g), sampler, &c.schedule, n, c.seed, "surrogate")
    }
}

fn probe(c: &ProbeConfig) -> Result<Outcome> {
    let dom = c.domain.build()?;
    let model = matches!(dom, Domain::Ball { .. } | Domain::Polydisc { .. } | Domain::HalfPlane { .. });
    let exact = match c.metric {
        MetricChoice::Auto => model,
        MetricChoice::Exact => true,
        MetricChoice::Surrogate => false,
    };
    let report = match &dom {
        Domain::Ball { dim, .. } => domain_scan(&dom, &BallSphereSampler { dim: *dim }, c, exact)?,
        Domain::Polydisc { radii } => domain_scan(&dom, &PolydiscSampler { dim: radii.len(), planted: c.sampler.planted }, c, exact)?,
        Domain::Epigraph(_) => domain_scan(&dom, &HomogeneousTemplateSampler::new(dom.clone())?, c, exact)?,
        _ => return Err(GeomError::InvalidParameter("no quadruple sampler for this family".into())),
    };
    let (table, summary) = scan_table(&report, if exact { "exact" } else { "curve_length" })?;
    Ok(Outcome { label: dom.label(), table, summary })
}

fn complex_header(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).flat_map(|j| [format!("{prefix}{j}_re"), format!("{prefix}{j}_im")]).collect()
}

fn geodesic(c: &GeodesicConfig) -> Result<Outcome> {
    let dom = c.domain.build()?;
    let (p, q) = (to_cpoint(&c.p), to_cpoint(&c.q));
    let (curve, report) = optimize_geodesic(&dom, &p, &q, &with_seed(&c.geodesic, c.seed))?;
    let mut header = vec!["t".to_string()];
    header.extend(complex_header("z", dom.dim()));
    header.extend(["cumulative_length", "estimator", "seed"].map(String::from));
    let mut cumulative = 0.0;
    let mut rows = Vec::with_capacity(curve.len());
    for (i, (node, t)) in curve.nodes().iter().zip(curve.times()).enumerate() {
        if i > 0 {
            let seg = PolyCurve::new(vec![curve.nodes()[i - 1].clone(), node.clone()], vec![0.0, 1.0])?;
            cumulative += curve_length_upper(&dom, &seg)?;
        }
        let mut row = vec![Cell::Num(*t)];
        row.extend(node.iter().flat_map(|z| [Cell::Num(z.re), Cell::Num(z.im)]));
        row.extend([Cell::Num(cumulative), text("curve_length"), Cell::Int(c.seed)]);
        rows.push(row);
    }
    let summary = serde_json::to_value(&report).map_err(|e| GeomError::InvalidParameter(e.to_string()))?;
    Ok(Outcome { label: dom.label(), table: Table { header, rows }, summary })
}

fn sandwich(c: &SandwichConfig) -> Result<Outcome> {
    let dom = c.domain.build()?;
    let g = with_seed(&c.geodesic, c.seed);
    let header = ["pair", "lower", "upper", "lower_by", "upper_by", "exact", "seed"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (i, [p, q]) in c.pairs.iter().enumerate() {
        let (pc, qc) = (to_cpoint(p), to_cpoint(q));
        let b = distance_interval(&dom, &pc, &qc, &g)?;
        let exact = match exact_distance(&dom, &pc, &qc) {
            Ok(x) => Some(x),
            Err(GeomError::ModelOnly) => None,
            Err(e) => return Err(e),
        };
        rows.push(vec![
            Cell::Int(i as u64),
            Cell::Num(b.lower),
            Cell::Num(b.upper),
            text(b.lower_by.tag()),
            text(b.upper_by.tag()),
            exact.map_or(Cell::Empty, Cell::Num),
            Cell::Int(c.seed),
        ]);
        records.push(json!({
            "p": p, "q": q, "lower": b.lower, "upper": b.upper,
            "estimator_tags": [b.lower_by.tag(), b.upper_by.tag()],
        }));
    }
    Ok(Outcome { label: dom.label(), table: Table { header, rows }, summary: json!({ "records": records }) })
}

fn hilbert(c: &HilbertConfig) -> Result<Outcome> {
    let body = c.body.build()?;
    let sampler = BodySampler { body: body.clone(), planted: c.sampler.planted };
    let report = hilbert_four_point_scan(&body, &sampler, &c.schedule, c.sampler.quadruples, c.seed)?;
    let (table, summary) = scan_table(&report, "cross_ratio")?;
    let label = serde_json::to_string(&c.body).unwrap_or_default();
    Ok(Outcome { label, table, summary })
}

fn converge(c: &ConvergeConfig) -> Result<Outcome> {
    let limit = c.limit.build()?;
    let (index, members): (Vec<f64>, Vec<Domain>) = match (&c.domain, &c.schedule, &c.sequence) {
        (Some(d), Some(s), None) => (s.clone(), rescaled_family(&d.build()?, s)?),
        (None, None, Some(seq)) => ((1..=seq.len()).map(|n| n as f64).collect(), seq.iter().map(|f| f.build()).collect::<Result<_>>()?),
        _ => return Err(GeomError::InvalidParameter("converge needs domain with schedule, or a sequence".into())),
    };
    let refs: Vec<&Domain> = members.iter().collect();
    let pairs: Vec<(CPoint, CPoint)> = c.pairs.iter().map(|[p, q]| (to_cpoint(p), to_cpoint(q))).collect();
    let tangents: Vec<(CPoint, CPoint)> = c.tangents.iter().map(|[p, v]| (to_cpoint(p), to_cpoint(v))).collect();
    let table = metric_convergence_probe(&refs, &limit, &pairs, &tangents, &with_seed(&c.geodesic, c.seed))?;
    let mut header = ["n", "d_h", "error_bar", "estimator", "skipped"].map(String::from).to_vec();
    for i in 0..pairs.len() {
        header.extend([format!("pair{i}_lower"), format!("pair{i}_upper"), format!("pair{i}_lower_by"), format!("pair{i}_upper_by")]);
    }
    header.extend((0..tangents.len()).map(|i| format!("khat{i}")));
    header.extend(["interval_drift", "khat_drift", "seed"].map(String::from));
    let mut rows = Vec::new();
    for ((n, dom), row) in index.iter().zip(&members).zip(&table.rows) {
        let h = local_hausdorff(dom, &limit, c.radius, c.resolution)?;
        let mut cells = vec![Cell::Num(*n), Cell::Num(h.value), Cell::Num(h.error_bar), text("grid_hausdorff")];
        if row.skipped {
            cells.push(text("true"));
            cells.extend(std::iter::repeat_n(Cell::Empty, 4 * pairs.len() + tangents.len() + 2));
        } else {
            cells.push(text("false"));
            for b in &row.intervals {
                cells.extend([Cell::Num(b.lower), Cell::Num(b.upper), text(b.lower_by.tag()), text(b.upper_by.tag())]);
            }
            cells.extend(row.khat_values.iter().map(|k| Cell::Num(*k)));
            cells.extend([Cell::Num(row.interval_drift), Cell::Num(row.khat_drift)]);
        }
        cells.push(Cell::Int(c.seed));
        rows.push(cells);
    }
    let summary = json!({ "limit_khat": table.limit_khat, "limit": limit.label() });
    Ok(Outcome { label: format!("{} -> {}", members.first().map(|d| d.label()).unwrap_or_default(), limit.label()), table: Table { header, rows }, summary })
}

fn flats(c: &FlatsConfig) -> Result<Outcome> {
    let dom = c.domain.build()?;
    let (x, y) = (to_cpoint(&c.x), to_cpoint(&c.y));
    let header = ["t", "value", "bound", "estimator", "seed"].map(String::from).to_vec();
    let row = |t: f64, v: f64, bound: &str, est: &str| vec![Cell::Num(t), Cell::Num(v), text(bound), text(est), Cell::Int(c.seed)];
    let (rows, summary) = match c.probe {
        FlatsProbe::Divergence => {
            let t = boundary_divergence_probe(&dom, &x, &y, &c.schedule)?;
            let rows = t.rows.iter().map(|(s, v)| row(*s, *v, "lower", "distance_lower")).collect();
            (rows, json!({ "probe": "divergence", "slope": t.slope }))
        }
        FlatsProbe::Shadowing => {
            let r = flat_shadowing_probe(&dom, &x, &y, &c.schedule, &with_seed(&c.geodesic, c.seed), false)?;
            let rows = r.rows.iter().map(|(s, v)| row(*s, *v, "upper", "curve_length")).collect();
            (rows, json!({ "probe": "shadowing", "ratio": r.ratio, "bounded": r.bounded, "in_flat": r.in_flat, "sup_gap": r.sup_gap }))
        }
    };
    Ok(Outcome { label: dom.label(), table: Table { header, rows }, summary })
}

/// Runs a validated experiment.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg {
        ExperimentConfig::Probe(c) => probe(c),
        ExperimentConfig::Geodesic(c) => geodesic(c),
        ExperimentConfig::Sandwich(c) => sandwich(c),
        ExperimentConfig::Hilbert(c) => hilbert(c),
        ExperimentConfig::Converge(c) => converge(c),
        ExperimentConfig::Flats(c) => flats(c),
    }
}

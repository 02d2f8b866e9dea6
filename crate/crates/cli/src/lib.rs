//! Commands behind the `klein-parallelisms` binary. Every command returns a
//! [`Report`] whose JSON form depends only on the [`RunConfig`].

use std::collections::BTreeMap;

use klein_core::algebras::AlgebraH;
use klein_core::field::{FieldSpec, Scalar};
use klein_core::flocks::{self, LinearFlockRef};
use klein_core::forms::{self, IsotropyVerdict};
use klein_core::hfd::{self, HfdCase, HfdDescriptor, HfdJson};
use klein_core::klein::{self, SAMPLE_HEIGHT};
use klein_core::linalg;
use klein_core::proj::{self, Subspace};
use klein_core::spreads::{self, PartitionReport, ParallelismDescriptor, Side, SpreadDescriptor, SpreadError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// Failures listed per check in a report.
const MAX_LISTED_FAILURES: usize = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("algebra is not a division algebra")]
    NotDivision,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
            CliError::NotDivision => "not_division",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub field: String,
    pub seed: u64,
    pub samples: usize,
    pub output: String,
    pub input: Option<String>,
    pub out: Option<String>,
    pub generator: &'static str,
    pub parameters: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn field(&self) -> Result<FieldSpec, CliError> {
        FieldSpec::parse_name(&self.field).map_err(input)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.sub_seed(stream))
    }

    fn sub_seed(&self, stream: u64) -> u64 {
        self.seed.wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub results: Vec<CheckResult>,
    pub counts: BTreeMap<String, u64>,
}

impl Report {
    fn new(config: &RunConfig) -> Self {
        Self {
            config: config.clone(),
            results: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    fn push(&mut self, check: &str, status: Status, details: Value) {
        self.results.push(CheckResult {
            check: check.into(),
            status,
            details,
        });
    }

    fn check(&mut self, check: &str, pass: bool, details: Value) {
        self.push(check, if pass { Status::Pass } else { Status::Fail }, details);
    }

    fn finish(mut self) -> Self {
        let count = |s: Status| self.results.iter().filter(|r| r.status == s).count() as u64;
        let (p, f, s) = (count(Status::Pass), count(Status::Fail), count(Status::Skipped));
        self.counts.insert("checks".into(), self.results.len() as u64);
        self.counts.insert("passed".into(), p);
        self.counts.insert("failed".into(), f);
        self.counts.insert("skipped".into(), s);
        self
    }

    pub fn failed(&self) -> u64 {
        self.counts.get("failed").copied().unwrap_or(0)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed() > 0)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} over {} (seed {}, samples {})\n",
            self.config.command, self.config.field, self.config.seed, self.config.samples
        );
        for r in &self.results {
            let status = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out += &format!("  {status:<4} {}\n", r.check);
        }
        let counts: Vec<String> = self.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out += &format!("  {}\n", counts.join(" "));
        out
    }
}

/// A report, plus a descriptor when the command builds one.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub descriptor: Option<HfdJson>,
}

fn partition_details(r: &PartitionReport) -> Value {
    json!({
        "checked": r.checked,
        "seed": r.seed,
        "failures": r.failures.len(),
        "first_failures": r.failures.iter().take(MAX_LISTED_FAILURES).collect::<Vec<_>>(),
    })
}

fn error_details<E: std::fmt::Display>(e: E) -> Value {
    json!({ "error": e.to_string() })
}

/// The quaternion algebra `(a,b)_K`, or the tower algebra over GF(2)(s,t).
pub fn algebra_for(field: FieldSpec, a: i64, b: i64) -> Result<AlgebraH, CliError> {
    let h = match field {
        FieldSpec::F2RationalFunctions => AlgebraH::tower(),
        _ => AlgebraH::quaternion_ints(field, a, b).map_err(input)?,
    };
    if !h.is_division().map_err(input)? {
        return Err(CliError::NotDivision);
    }
    Ok(h)
}

fn clifford_plane(
    h: &AlgebraH,
    side: Side,
    samples: usize,
    config: &RunConfig,
) -> Result<spreads::CliffordPlane, CliError> {
    let mut rng = config.rng(0);
    spreads::clifford_hfd_plane(h, side, samples, &mut rng).map_err(|e| match e {
        SpreadError::NotDivision => CliError::NotDivision,
        other => input(other),
    })
}

fn constant_descriptor(cp: &spreads::CliffordPlane) -> Result<HfdDescriptor, CliError> {
    let field = cp.plane.field();
    let d = Subspace::from_rows(field, 5, cp.plane.rows()[..2].to_vec()).map_err(input)?;
    HfdDescriptor::constant(d, cp.plane.clone(), cp.certificate.clone()).map_err(input)
}

fn two_plane_descriptor(cp: &spreads::CliffordPlane) -> Result<HfdDescriptor, CliError> {
    let field = cp.plane.field();
    let second = klein::second_external_plane(&cp.plane, cp.certificate.as_ref(), 0).map_err(input)?;
    let params: Vec<(Scalar, Scalar)> = vec![
        (field.one(), field.zero()),
        (field.zero(), field.one()),
        (field.one(), field.one()),
    ];
    let certificates = if cp.certificate.is_some() {
        vec![
            cp.certificate.clone(),
            klein::external_plane_certificate(&second.plane).map_err(input)?,
        ]
    } else {
        Vec::new()
    };
    HfdDescriptor::two_plane(cp.plane.clone(), second.plane, &params, certificates).map_err(input)
}

fn classification_check(report: &mut Report, d: &HfdDescriptor) -> Option<HfdCase> {
    match hfd::classify(d) {
        Ok(c) => {
            let is_clifford = c.case == HfdCase::PlaneOfLines;
            let consistent = if is_clifford { c.dimension == 2 } else { c.dimension >= 3 && c.k.len() >= 2 };
            report.check(
                "classification",
                consistent,
                json!({
                    "case": c.case,
                    "V": c.v.to_json(),
                    "K": c.k.iter().map(Subspace::to_json).collect::<Vec<_>>(),
                    "h": c.h,
                    "dimension": c.dimension,
                    "is_clifford": is_clifford,
                }),
            );
            Some(c.case)
        }
        Err(e) => {
            report.check("classification", false, error_details(e));
            None
        }
    }
}

fn validation_check(report: &mut Report, d: &HfdDescriptor) -> bool {
    match hfd::validate_descriptor(d) {
        Ok(()) => {
            report.check("validation", true, json!({ "planes": d.planes.len(), "exceptions": d.exceptions.len() }));
            true
        }
        Err(e) => {
            report.check("validation", false, error_details(e));
            false
        }
    }
}

/// `demo clifford`: the Clifford parallelism of a quaternion division algebra
/// and its plane of lines.
pub fn demo_clifford(config: &RunConfig, a: i64, b: i64, side: Side) -> Result<Outcome, CliError> {
    let field = config.field()?;
    let h = algebra_for(field, a, b)?;
    let mut report = Report::new(config);
    report.check("division_algebra", true, json!({ "algebra": h.to_json() }));
    let cp = clifford_plane(&h, side, config.samples, config)?;
    let polar_type = klein::plane_polar_type(&cp.plane).map_err(input)?;
    report.check(
        "clifford_plane",
        true,
        json!({
            "plane": cp.plane.to_json(),
            "certificate": cp.certificate,
            "checked_classes": cp.checked_classes,
            "plane_polar_type": polar_type,
        }),
    );
    let external = klein::is_external_plane(&cp.plane, cp.certificate.as_ref());
    report.check(
        "plane_external",
        matches!(external, Ok(true)),
        match &external {
            Ok(v) => json!({ "external": v }),
            Err(e) => error_details(e),
        },
    );
    let d = constant_descriptor(&cp)?;
    validation_check(&mut report, &d);
    classification_check(&mut report, &d);

    let l = spreads::subalgebra_line(&h, &h.basis(1)).map_err(input)?;
    let coset = SpreadDescriptor::coset(h.clone(), l, side).map_err(input)?;
    match spreads::verify_spread_partition(&coset, config.samples, config.sub_seed(1)) {
        Ok(r) => report.check("spread_partition", r.passed(), partition_details(&r)),
        Err(e) => report.check("spread_partition", false, error_details(e)),
    }
    let par = ParallelismDescriptor::Clifford {
        algebra: h.clone(),
        side,
    };
    match spreads::verify_parallelism_partition(&par, config.samples, config.sub_seed(2)) {
        Ok(r) => report.check("parallelism_partition", r.passed(), partition_details(&r)),
        Err(e) => report.check("parallelism_partition", false, error_details(e)),
    }
    if field.characteristic() == 2 {
        let mut rng = config.rng(3);
        let mut bad = 0;
        for _ in 0..config.samples {
            let line = klein::random_line3(field, &mut rng);
            let g = spreads::clifford_class(&h, side, &line)
                .and_then(|c| spreads::gamma(&c))
                .map_err(input)?;
            if !klein::is_nucleus_line(&g).map_err(input)? {
                bad += 1;
            }
        }
        report.check("nucleus_lines", bad == 0, json!({ "checked": config.samples, "not_nucleus": bad }));
    }
    Ok(Outcome {
        report: report.finish(),
        descriptor: Some(d.to_json()),
    })
}

/// `construct-hfd`: read a descriptor, or build the constant or two-plane
/// descriptor from a Clifford plane; validate and classify it.
pub fn construct_hfd(
    config: &RunConfig,
    source: Option<&str>,
    auto_second_plane: bool,
    a: i64,
    b: i64,
    side: Side,
) -> Result<Outcome, CliError> {
    let d = match source {
        Some(text) => parse_descriptor(text)?,
        None => {
            let h = algebra_for(config.field()?, a, b)?;
            let cp = clifford_plane(&h, side, 0, config)?;
            if auto_second_plane {
                two_plane_descriptor(&cp)?
            } else {
                constant_descriptor(&cp)?
            }
        }
    };
    let mut report = Report::new(config);
    report.config.field = d.field().short_name();
    if validation_check(&mut report, &d) {
        classification_check(&mut report, &d);
    } else {
        report.push("classification", Status::Skipped, json!({ "reason": "validation failed" }));
    }
    Ok(Outcome {
        report: report.finish(),
        descriptor: Some(d.to_json()),
    })
}

pub fn parse_descriptor(text: &str) -> Result<HfdDescriptor, CliError> {
    let json: HfdJson = serde_json::from_str(text).map_err(input)?;
    HfdDescriptor::from_json(&json).map_err(input)
}

/// The vector with coordinates `w` in the row basis of `s`.
fn lift(s: &Subspace, w: &[Scalar]) -> Vec<Scalar> {
    let field = s.field();
    s.rows()
        .iter()
        .zip(w)
        .fold(vec![field.zero(); s.ambient() + 1], |acc, (r, c)| linalg::combine(&field.one(), &acc, c, r))
}

/// Points of H₅ in each plane of the descriptor, when the plane has any.
fn targeted_points(d: &HfdDescriptor) -> Vec<Subspace> {
    let mut out = Vec::new();
    for plane in &d.planes {
        if let Ok(IsotropyVerdict::Isotropic { witness }) = forms::decide_isotropy(&klein::restrict(plane)) {
            if let Ok(p) = Subspace::point(plane.field(), lift(plane, &witness)) {
                out.push(p);
            }
        }
    }
    out
}

fn exactly_one_check(report: &mut Report, config: &RunConfig, d: &HfdDescriptor) {
    let mut rng = config.rng(10);
    let targeted = targeted_points(d);
    let mut points: Vec<Subspace> = (0..config.samples)
        .map(|_| klein::random_quadric_point(d.field(), &mut rng))
        .collect();
    points.extend(targeted.iter().cloned());
    let mut failures = Vec::new();
    let mut member_counts: BTreeMap<usize, u64> = BTreeMap::new();
    for (index, x) in points.iter().enumerate() {
        match hfd::verify_hfd_at(d, x) {
            Ok(c) => {
                *member_counts.entry(c.members).or_default() += 1;
                if !c.pass {
                    failures.push(json!({ "index": index, "detail": c.detail }));
                }
            }
            Err(e) => failures.push(json!({ "index": index, "detail": e.to_string() })),
        }
    }
    let histogram: BTreeMap<String, u64> = member_counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    report.check(
        "hfd_exactly_one",
        failures.is_empty(),
        json!({
            "random_points": config.samples,
            "targeted_points": targeted.len(),
            "failures": failures.len(),
            "first_failures": failures.iter().take(MAX_LISTED_FAILURES).collect::<Vec<_>>(),
            "member_count_histogram": histogram,
        }),
    );
}

fn flock_check(report: &mut Report, config: &RunConfig, d: &HfdDescriptor) {
    let plane = &d.planes[d.default];
    let mut rng = config.rng(11);
    let pole = loop {
        let p = plane.random_point(&mut rng, SAMPLE_HEIGHT);
        if !matches!(klein::on_quadric(&p), Ok(true)) {
            break p;
        }
    };
    let result = LinearFlockRef::new(pole.clone(), plane.clone(), d.certificate(d.default))
        .and_then(|fl| flocks::verify_flock_partition(&fl, config.samples, 5, config.sub_seed(12)));
    match result {
        Ok(r) => {
            let mut details = partition_details(&r);
            details["pole"] = json!(pole.to_json());
            report.check("flock_partition", r.passed(), details);
        }
        Err(e) => report.check("flock_partition", false, error_details(e)),
    }
}

/// `verify`: exactly-one property at random points of H₅, parallelism and
/// flock partitions, and the distinguished class.
pub fn verify(config: &RunConfig, text: &str, skip_validate: bool) -> Result<Outcome, CliError> {
    let d = parse_descriptor(text)?;
    let mut report = Report::new(config);
    report.config.field = d.field().short_name();
    if skip_validate {
        report.push("validation", Status::Skipped, json!({ "reason": "--skip-validate" }));
    } else if !validation_check(&mut report, &d) {
        return Ok(Outcome {
            report: report.finish(),
            descriptor: None,
        });
    }
    exactly_one_check(&mut report, config, &d);
    let par = ParallelismDescriptor::Hfd(d.clone());
    match spreads::verify_parallelism_partition(&par, config.samples, config.sub_seed(13)) {
        Ok(r) => report.check("parallelism_partition", r.passed(), partition_details(&r)),
        Err(e) => report.check("parallelism_partition", false, error_details(e)),
    }
    flock_check(&mut report, config, &d);
    match hfd::classify(&d) {
        Ok(c) if c.case == HfdCase::PlaneOfLines => {
            report.push("distinguished_class", Status::Skipped, json!({ "reason": "plane of lines" }))
        }
        Ok(_) => match flocks::verify_distinguished_class(&d, 10, config.samples.min(100), config.sub_seed(14)) {
            Ok((_, r)) => report.check("distinguished_class", r.passed(), partition_details(&r)),
            Err(e) => report.check("distinguished_class", false, error_details(e)),
        },
        Err(e) => report.check("distinguished_class", false, error_details(e)),
    }
    Ok(Outcome {
        report: report.finish(),
        descriptor: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchTarget {
    ExternalPlanes,
    ZeroSecants,
    All,
}

/// `search-finite`: exhaustive counts over GF(2) or GF(3).
pub fn search_finite(config: &RunConfig, what: SearchTarget) -> Result<Outcome, CliError> {
    let field = config.field()?;
    if !matches!(field.order(), Some(2 | 3)) {
        return Err(CliError::Input(format!("search-finite needs gf2 or gf3, got {field}")));
    }
    let found = klein::search_finite(field).map_err(input)?;
    let mut report = Report::new(config);
    if what != SearchTarget::ZeroSecants {
        report.check(
            "external_planes",
            found.external_planes == 0,
            json!({ "planes": found.planes, "external_planes": found.external_planes }),
        );
    }
    if what != SearchTarget::ExternalPlanes {
        report.check(
            "zero_secants",
            found.zero_secants > 0,
            json!({ "lines": found.lines, "zero_secants": found.zero_secants }),
        );
    }
    let mut report = report.finish();
    report.counts.insert("planes".into(), found.planes);
    report.counts.insert("external_planes".into(), found.external_planes);
    report.counts.insert("lines".into(), found.lines);
    report.counts.insert("zero_secants".into(), found.zero_secants);
    Ok(Outcome { report, descriptor: None })
}

/// `search-dimension`: external planes through one line `D` obtained by
/// reflecting `κ₁` in points of `π₅(D)` off H₅, until their span reaches
/// `target`; the resulting descriptor is validated, classified and checked.
pub fn search_dimension(
    config: &RunConfig,
    target: isize,
    budget: usize,
    a: i64,
    b: i64,
    side: Side,
) -> Result<Outcome, CliError> {
    if !(3..=5).contains(&target) {
        return Err(CliError::Input(format!("target dimension must be 3, 4 or 5, got {target}")));
    }
    let field = config.field()?;
    if field.characteristic() == 2 {
        return Err(CliError::Input("search-dimension needs odd or zero characteristic".into()));
    }
    let h = algebra_for(field, a, b)?;
    let cp = clifford_plane(&h, side, 0, config)?;
    let d_line = Subspace::from_rows(field, 5, cp.plane.rows()[..2].to_vec()).map_err(input)?;
    let centres = klein::polar(&d_line).map_err(input)?;
    let mut planes = vec![cp.plane.clone()];
    let mut span = cp.plane.clone();
    let mut rng = config.rng(20);
    let mut tried = 0;
    while span.dim() < target && tried < budget {
        tried += 1;
        let q = centres.random_point(&mut rng, SAMPLE_HEIGHT);
        let qv = q.vector().expect("point").clone();
        if klein::q_eval(&qv).is_zero() {
            continue;
        }
        let kappa = klein::reflect_subspace(&qv, &cp.plane).map_err(input)?;
        let grown = span.join(&kappa).map_err(input)?;
        if grown.dim() > span.dim() {
            planes.push(kappa);
            span = grown;
        }
    }
    let mut report = Report::new(config);
    let reached = span.dim();
    report.check(
        "dimension_reached",
        reached >= target,
        json!({ "target": target, "reached": reached, "planes": planes.len(), "centres_tried": tried }),
    );
    if reached < target {
        return Ok(Outcome {
            report: report.finish(),
            descriptor: None,
        });
    }
    let params: Vec<(Scalar, Scalar)> = vec![
        (field.one(), field.zero()),
        (field.zero(), field.one()),
        (field.one(), field.one()),
        (field.one(), field.from_i64(-1)),
    ];
    let exceptions = (1..planes.len())
        .map(|i| {
            let (t0, t1) = params[i - 1].clone();
            Ok(hfd::Exception {
                param: proj::LineParam::new(d_line.clone(), t0, t1).map_err(input)?,
                plane: i,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let d = HfdDescriptor::new(d_line, planes, 0, exceptions, Vec::new()).map_err(input)?;
    if validation_check(&mut report, &d) {
        classification_check(&mut report, &d);
        exactly_one_check(&mut report, config, &d);
    }
    Ok(Outcome {
        report: report.finish(),
        descriptor: Some(d.to_json()),
    })
}

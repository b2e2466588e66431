//! Run configuration and the verification campaigns behind the CLI verbs.
//!
//! Every command returns an [`Outcome`] holding a JSON document (JSON lines
//! for `verify-identities`), a CSV summary and a pass flag. Reports embed the
//! full configuration, seed, tolerances and library version, and contain no
//! timings, so identical configurations give byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use faer::Col;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elasticity_assembly::{build_complex, korn_constant, AssembledComplex, BoundarySelection, LevelDescriptor};
use crate::fa_toolbox::{
    cohomology, default_decomposition, mixed_estimate_check, poincare_report, random_spd, DecompositionChecks,
    FiniteComplex, Helmholtz, PoincareReport, RankTol, Vector,
};
use crate::identity_suite::{run_all, VerificationReport};
use crate::{Error, Result, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    Complex,
    Fixture,
    Helmholtz,
    Poincare,
    Korn,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::Complex => "complex",
            Command::Fixture => "fixture",
            Command::Helmholtz => "helmholtz",
            Command::Poincare => "poincare",
            Command::Korn => "korn",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    #[default]
    Identity,
    /// `W = B^T B + 0.1 I` with uniform `B`, inserted in every space.
    #[serde(alias = "random")]
    RandomSpd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every field has a default; a config file may set any subset and command
/// line flags override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Random samples per identity.
    pub trials: usize,
    /// Total degree bound of the random polynomials in the identity suite.
    pub degree: u32,
    /// Per-variable degree of the assembled complex (lowest one for sweeps).
    pub p: u32,
    /// Upper end of a degree sweep; `None` means only `p`.
    pub p_max: Option<u32>,
    pub gt: BoundarySelection,
    pub weights: WeightMode,
    /// Relative rank threshold; `None` uses the `eps`-scaled default.
    pub tol_rank: Option<f64>,
    /// Tolerance for residual checks (reconstruction, orthogonality, sharpness).
    pub check_tol: f64,
    /// Tolerance on `||A_{n+1} A_n||_max` after conversion to floats.
    pub defect_tol: f64,
    /// Random vectors per Helmholtz / mixed-estimate check.
    pub samples: usize,
    /// Space index for `helmholtz`.
    pub level: usize,
    pub only: Vec<String>,
    /// Perturb one coefficient per identity; the run passes if every case fails.
    pub mutate: bool,
    pub fixture: Option<String>,
    pub out: Option<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 2024,
            trials: 20,
            degree: 3,
            p: 4,
            p_max: None,
            gt: BoundarySelection::none(),
            weights: WeightMode::Identity,
            tol_rank: None,
            check_tol: 1e-10,
            defect_tol: 1e-12,
            samples: 100,
            level: 1,
            only: Vec::new(),
            mutate: false,
            fixture: None,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn rank_tol(&self) -> RankTol {
        match self.tol_rank {
            Some(r) => RankTol::relative(r),
            None => RankTol::default(),
        }
    }

    pub fn degrees(&self) -> Vec<u32> {
        (self.p..=self.p_max.unwrap_or(self.p).max(self.p)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.check_tol > 0.0 && self.defect_tol >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(r) = self.tol_rank {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Config(format!("--tol-rank must lie in (0, 1), got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub rank: RankTol,
    pub check: f64,
    pub float_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub config: RunConfig,
}

fn header(cmd: Command, cfg: &RunConfig) -> Header {
    Header {
        tool: "elasticity",
        version: VERSION,
        command: cmd.name(),
        seed: cfg.seed,
        tolerances: Tolerances { rank: cfg.rank_tol(), check: cfg.check_tol, float_defect: cfg.defect_tol },
        config: cfg.clone(),
    }
}

/// A named pass/fail criterion with the measured value.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Rendered result of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub json: String,
    pub csv: String,
    /// Human-readable lines for failed checks.
    pub diagnostics: Vec<String>,
}

impl Outcome {
    pub fn render(&self, format: Format) -> &str {
        match format {
            Format::Json => &self.json,
            Format::Csv => &self.csv,
        }
    }
}

fn diagnostics(checks: &[Check]) -> Vec<String> {
    checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cmd {
        Command::VerifyIdentities => cmd_verify_identities(cfg),
        Command::Complex => cmd_complex(cfg),
        Command::Fixture => cmd_fixture(cfg),
        Command::Helmholtz => cmd_helmholtz(cfg),
        Command::Poincare => cmd_poincare(cfg),
        Command::Korn => cmd_korn(cfg),
    }
}

/// Stream of random numbers dedicated to one purpose, derived from the seed.
fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Col::from_fn(n, |_| rng.random_range(-1.0..=1.0))
}

/// Insert random SPD weights in every space when requested.
pub fn apply_weights(complex: &FiniteComplex, mode: WeightMode, seed: u64) -> Result<FiniteComplex> {
    let mut c = complex.clone();
    if mode == WeightMode::RandomSpd {
        for n in 0..c.num_spaces() {
            let mut rng = rng_for(seed, 1000 + n as u64);
            let w = random_spd(c.dim(n), 0.1, &mut rng);
            c = c.reweighted(n, &w)?;
        }
    }
    Ok(c)
}

// ---------------------------------------------------------------- identities

#[derive(Serialize)]
struct IdentityLine<'a> {
    #[serde(flatten)]
    report: &'a VerificationReport,
    /// Whether this case met the expectation of the run (pass, or fail under mutation).
    expected: bool,
}

#[derive(Serialize)]
struct IdentitySummary {
    summary: IdentityCounts,
}

#[derive(Serialize)]
struct IdentityCounts {
    cases: usize,
    passed: usize,
    failed: usize,
    mutated: bool,
    ok: bool,
}

pub fn cmd_verify_identities(cfg: &RunConfig) -> Result<Outcome> {
    let reports = run_all(&cfg.only, cfg.trials, cfg.degree, cfg.seed, cfg.mutate)
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut json = serde_json::to_string(&header(Command::VerifyIdentities, cfg)).expect("header serializes") + "\n";
    let mut csv = String::from("id,passed,trials,degree,seed,mutated,failed_clause\n");
    let mut diags = Vec::new();
    for r in &reports {
        let expected = r.passed != cfg.mutate;
        json += &(serde_json::to_string(&IdentityLine { report: r, expected }).expect("report serializes") + "\n");
        let clause = r.counterexample.as_ref().map(|c| c.clause.replace('"', "'")).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{},{},{},\"{}\"", r.id, r.passed, r.trials, r.degree, r.seed, r.mutated, clause);
        if !expected {
            diags.push(match &r.counterexample {
                Some(c) => format!("{} failed clause `{}` at trial {}: lhs = {}, rhs = {}", r.id, c.clause, c.trial, c.lhs, c.rhs),
                None => format!("{} was not detected by the mutation run", r.id),
            });
        }
    }
    let passed_count = reports.iter().filter(|r| r.passed).count();
    let ok = diags.is_empty();
    let summary = IdentitySummary {
        summary: IdentityCounts {
            cases: reports.len(),
            passed: passed_count,
            failed: reports.len() - passed_count,
            mutated: cfg.mutate,
            ok,
        },
    };
    json += &(serde_json::to_string(&summary).expect("summary serializes") + "\n");
    Ok(Outcome { passed: ok, json, csv, diagnostics: diags })
}

// ---------------------------------------------------------------- complexes

#[derive(Clone, Debug, Serialize)]
pub struct ConstantSummary {
    pub operator: String,
    pub constant: f64,
    pub sigma_min: f64,
    pub rank: usize,
    pub sharpness_residual: f64,
}

fn constants(report: &PoincareReport) -> Vec<Option<ConstantSummary>> {
    report
        .constants
        .iter()
        .map(|c| {
            c.as_ref().map(|c| ConstantSummary {
                operator: c.label.clone(),
                constant: c.constant,
                sigma_min: c.sigma_min,
                rank: c.rank,
                sharpness_residual: c.sharpness_residual,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct HelmholtzSummary {
    pub level: usize,
    pub samples: usize,
    pub max_reconstruction_residual: f64,
    pub max_orthogonality_residual: f64,
    pub max_harmonic_residual: f64,
    pub harmonic_dimension: usize,
}

fn helmholtz_summary(complex: &FiniteComplex, n: usize, samples: usize, seed: u64, tol: RankTol) -> Result<HelmholtzSummary> {
    let h = Helmholtz::new(complex, n, tol)?;
    let mut rng = rng_for(seed, 2000 + n as u64);
    let mut s = HelmholtzSummary {
        level: n,
        samples,
        max_reconstruction_residual: 0.0,
        max_orthogonality_residual: 0.0,
        max_harmonic_residual: 0.0,
        harmonic_dimension: cohomology(complex, n, tol)?.dimension,
    };
    for _ in 0..samples {
        let r = h.decompose(&random_vector(&mut rng, complex.dim(n)))?;
        s.max_reconstruction_residual = s.max_reconstruction_residual.max(r.reconstruction_residual);
        s.max_orthogonality_residual = s.max_orthogonality_residual.max(r.max_orthogonality_residual());
        s.max_harmonic_residual = s.max_harmonic_residual.max(r.harmonic_residual);
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedSummary {
    pub level: usize,
    pub samples: usize,
    pub all_hold: bool,
    pub min_slack: f64,
}

/// The estimate `||x||^2 <= c_n^2 ||A_n x||^2 + c_{n-1}^2 ||A_{n-1}^* x||^2`
/// on random vectors with their harmonic part removed.
fn mixed_summary(
    complex: &FiniteComplex,
    n: usize,
    c_in: f64,
    c_out: f64,
    samples: usize,
    seed: u64,
    tol: RankTol,
) -> Result<MixedSummary> {
    let harm = cohomology(complex, n, tol)?;
    let g = complex.gram(n);
    let mut rng = rng_for(seed, 3000 + n as u64);
    let mut s = MixedSummary { level: n, samples, all_hold: true, min_slack: f64::INFINITY };
    for _ in 0..samples {
        let x = random_vector(&mut rng, complex.dim(n));
        let coef: Vector = harm.basis.transpose() * (g.gram() * &x);
        let x: Vector = &x - &harm.basis * &coef;
        let m = mixed_estimate_check(&x, complex, n, c_in, c_out, &harm)?;
        s.all_hold &= m.holds;
        s.min_slack = s.min_slack.min(m.slack);
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct KornSummary {
    pub constant: f64,
    pub min_ratio: f64,
    pub admissible_dim: usize,
    pub rigid_motions: usize,
    pub extremal_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexSummary {
    pub p: u32,
    pub gt: BoundarySelection,
    pub weights: WeightMode,
    pub dims: Vec<usize>,
    pub spaces: Vec<LevelDescriptor>,
    pub exact_complex_property: bool,
    pub composition_defects: Vec<f64>,
    pub ranks: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub cohomology_dims: Vec<usize>,
    pub rank_nullity_dims: Vec<usize>,
    pub poincare: Vec<Option<ConstantSummary>>,
    pub korn: KornSummary,
    pub helmholtz: HelmholtzSummary,
    pub gram_conditioning: Vec<f64>,
    pub checks: Vec<Check>,
}

pub fn summarize_complex(assembled: &AssembledComplex, cfg: &RunConfig) -> Result<ComplexSummary> {
    let tol = cfg.rank_tol();
    let c = apply_weights(assembled.complex(), cfg.weights, cfg.seed)?;
    let mut ranks = Vec::new();
    let mut kernel_dims = Vec::new();
    for n in 0..c.num_spaces() {
        let r = c.svd_out(n, tol)?.rank;
        kernel_dims.push(c.dim(n) - r);
        if n + 1 < c.num_spaces() {
            ranks.push(r);
        }
    }
    let mut cohomology_dims = Vec::new();
    let mut rank_nullity_dims = Vec::new();
    for n in 0..c.num_spaces() {
        let h = cohomology(&c, n, tol)?;
        cohomology_dims.push(h.dimension);
        rank_nullity_dims.push(h.rank_nullity_dimension);
    }
    let defects: Vec<f64> = (0..c.num_spaces() - 2).map(|n| c.composition_defect(n)).collect();
    let poincare = constants(&poincare_report(&c, tol)?);
    let k = korn_constant(assembled.p, assembled.boundary)?;
    let helm = helmholtz_summary(&c, 1, cfg.samples, cfg.seed, tol)?;
    let exact = assembled.exact_complex_property();

    let expected_rm = if assembled.boundary.is_empty() { 6 } else { 0 };
    let max_defect = defects.iter().cloned().fold(0.0, f64::max);
    let sharp = poincare.iter().flatten().map(|c| c.sharpness_residual).fold(0.0, f64::max);
    let checks = vec![
        check("exact_complex_property", exact, format!("A1 A0 = 0 and A2 A1 = 0 over the rationals: {exact}")),
        check("float_complex_property", max_defect <= cfg.defect_tol, format!("max |A(n+1) A(n)| = {max_defect:.3e}")),
        check(
            "rigid_motions",
            kernel_dims[0] == expected_rm,
            format!("dim N(A0) = {}, expected {expected_rm}", kernel_dims[0]),
        ),
        check(
            "rank_nullity",
            cohomology_dims == rank_nullity_dims,
            format!("cohomology {cohomology_dims:?} vs rank-nullity {rank_nullity_dims:?}"),
        ),
        check(
            "helmholtz",
            helm.max_reconstruction_residual <= cfg.check_tol && helm.max_orthogonality_residual <= cfg.check_tol,
            format!(
                "reconstruction {:.3e}, orthogonality {:.3e}",
                helm.max_reconstruction_residual, helm.max_orthogonality_residual
            ),
        ),
        check("poincare_sharpness", sharp <= cfg.check_tol, format!("max sharpness residual {sharp:.3e}")),
        check("korn_lower_bound", k.constant >= 1.0 - cfg.check_tol && k.constant.is_finite(), format!("Korn constant {:.6}", k.constant)),
    ];
    Ok(ComplexSummary {
        p: assembled.p,
        gt: assembled.boundary,
        weights: cfg.weights,
        dims: c.dims(),
        spaces: assembled.descriptors(),
        exact_complex_property: exact,
        composition_defects: defects,
        ranks,
        kernel_dims,
        cohomology_dims,
        rank_nullity_dims,
        poincare,
        korn: KornSummary {
            constant: k.constant,
            min_ratio: k.min_ratio,
            admissible_dim: k.admissible_dim,
            rigid_motions: k.rigid_motions,
            extremal_ratio: k.extremal_ratio,
        },
        helmholtz: helm,
        gram_conditioning: assembled.gram_conditioning(),
        checks,
    })
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    header: Header,
    passed: bool,
    results: T,
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn opt_constant(c: &[Option<ConstantSummary>], n: usize) -> String {
    c.get(n).and_then(|c| c.as_ref()).map(|c| format!("{:.12e}", c.constant)).unwrap_or_default()
}

pub fn cmd_complex(cfg: &RunConfig) -> Result<Outcome> {
    let mut results = Vec::new();
    for p in cfg.degrees() {
        let assembled = build_complex(p, cfg.gt)?;
        results.push(summarize_complex(&assembled, cfg)?);
    }
    let checks: Vec<Check> = results.iter().flat_map(|r| r.checks.clone()).collect();
    let passed = checks.iter().all(|c| c.passed);
    let mut csv = String::from(
        "p,gt,weights,dims,kernel_dims,cohomology_dims,c0,c1,c2,korn,helmholtz_reconstruction,helmholtz_orthogonality,max_defect,exact,passed\n",
    );
    for r in &results {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{:.12e},{:.3e},{:.3e},{:.3e},{},{}",
            r.p,
            r.gt,
            serde_json::to_value(r.weights).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            list(&r.dims),
            list(&r.kernel_dims),
            list(&r.cohomology_dims),
            opt_constant(&r.poincare, 0),
            opt_constant(&r.poincare, 1),
            opt_constant(&r.poincare, 2),
            r.korn.constant,
            r.helmholtz.max_reconstruction_residual,
            r.helmholtz.max_orthogonality_residual,
            r.composition_defects.iter().cloned().fold(0.0, f64::max),
            r.exact_complex_property,
            r.checks.iter().all(|c| c.passed),
        );
    }
    let json = to_json(&Document { header: header(Command::Complex, cfg), passed, results });
    Ok(Outcome { passed, json, csv, diagnostics: diagnostics(&checks) })
}

/// Source of the complex for `helmholtz` and `poincare`: a fixture file if
/// one is configured, otherwise the assembled complex for each degree.
fn complexes(cfg: &RunConfig) -> Result<Vec<(String, FiniteComplex)>> {
    match &cfg.fixture {
        Some(path) => Ok(vec![(path.clone(), apply_weights(&load_fixture(path)?, cfg.weights, cfg.seed)?)]),
        None => cfg
            .degrees()
            .into_iter()
            .map(|p| {
                let a = build_complex(p, cfg.gt)?;
                Ok((format!("p={p} gt={}", cfg.gt), apply_weights(a.complex(), cfg.weights, cfg.seed)?))
            })
            .collect(),
    }
}

pub fn load_fixture(path: &str) -> Result<FiniteComplex> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read fixture {path}: {e}")))?;
    FiniteComplex::from_json(&text).map_err(|e| Error::Config(format!("invalid fixture {path}: {e}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct HelmholtzReport {
    pub source: String,
    pub summary: HelmholtzSummary,
    pub checks: Vec<Check>,
}

pub fn cmd_helmholtz(cfg: &RunConfig) -> Result<Outcome> {
    let tol = cfg.rank_tol();
    let mut results = Vec::new();
    for (source, c) in complexes(cfg)? {
        if cfg.level >= c.num_spaces() {
            return Err(Error::Config(format!("level {} out of range for {} spaces", cfg.level, c.num_spaces())));
        }
        let s = helmholtz_summary(&c, cfg.level, cfg.samples, cfg.seed, tol)?;
        let checks = vec![
            check("reconstruction", s.max_reconstruction_residual <= cfg.check_tol, format!("{:.3e}", s.max_reconstruction_residual)),
            check("orthogonality", s.max_orthogonality_residual <= cfg.check_tol, format!("{:.3e}", s.max_orthogonality_residual)),
        ];
        results.push(HelmholtzReport { source, summary: s, checks });
    }
    let checks: Vec<Check> = results.iter().flat_map(|r| r.checks.clone()).collect();
    let passed = checks.iter().all(|c| c.passed);
    let mut csv = String::from("source,level,samples,harmonic_dimension,reconstruction,orthogonality,harmonic_residual\n");
    for r in &results {
        let s = &r.summary;
        let _ = writeln!(
            csv,
            "\"{}\",{},{},{},{:.3e},{:.3e},{:.3e}",
            r.source, s.level, s.samples, s.harmonic_dimension, s.max_reconstruction_residual, s.max_orthogonality_residual, s.max_harmonic_residual
        );
    }
    let json = to_json(&Document { header: header(Command::Helmholtz, cfg), passed, results });
    Ok(Outcome { passed, json, csv, diagnostics: diagnostics(&checks) })
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareEntry {
    pub source: String,
    pub constants: Vec<Option<ConstantSummary>>,
    pub mixed: Vec<MixedSummary>,
    pub checks: Vec<Check>,
}

/// Mixed estimates at every interior space, with zero constants for zero operators.
fn mixed_all(c: &FiniteComplex, consts: &[Option<ConstantSummary>], cfg: &RunConfig) -> Result<Vec<MixedSummary>> {
    let k = |n: usize| consts[n].as_ref().map(|c| c.constant).unwrap_or(0.0);
    (1..c.num_spaces() - 1).map(|n| mixed_summary(c, n, k(n - 1), k(n), cfg.samples, cfg.seed, cfg.rank_tol())).collect()
}

pub fn cmd_poincare(cfg: &RunConfig) -> Result<Outcome> {
    let mut results: Vec<PoincareEntry> = Vec::new();
    for (source, c) in complexes(cfg)? {
        let consts = constants(&poincare_report(&c, cfg.rank_tol())?);
        let mixed = mixed_all(&c, &consts, cfg)?;
        let sharp = consts.iter().flatten().map(|c| c.sharpness_residual).fold(0.0, f64::max);
        let checks = vec![
            check("sharpness", sharp <= cfg.check_tol, format!("max sharpness residual {sharp:.3e}")),
            check(
                "mixed_estimate",
                mixed.iter().all(|m| m.all_hold),
                format!("min slack {:.3e}", mixed.iter().map(|m| m.min_slack).fold(f64::INFINITY, f64::min)),
            ),
        ];
        results.push(PoincareEntry { source, constants: consts, mixed, checks });
    }
    let mut checks: Vec<Check> = results.iter().flat_map(|r| r.checks.clone()).collect();
    if cfg.fixture.is_none() && results.len() > 1 {
        checks.push(monotonicity_check(&results, cfg.check_tol));
    }
    let passed = checks.iter().all(|c| c.passed);
    let mut csv = String::from("source,c0,c1,c2,sharpness,mixed_holds\n");
    for r in &results {
        let _ = writeln!(
            csv,
            "\"{}\",{},{},{},{:.3e},{}",
            r.source,
            opt_constant(&r.constants, 0),
            opt_constant(&r.constants, 1),
            opt_constant(&r.constants, 2),
            r.constants.iter().flatten().map(|c| c.sharpness_residual).fold(0.0, f64::max),
            r.mixed.iter().all(|m| m.all_hold)
        );
    }
    #[derive(Serialize)]
    struct Results {
        entries: Vec<PoincareEntry>,
        checks: Vec<Check>,
    }
    let json = to_json(&Document { header: header(Command::Poincare, cfg), passed, results: Results { entries: results, checks: checks.clone() } });
    Ok(Outcome { passed, json, csv, diagnostics: diagnostics(&checks) })
}

/// Nondecreasing in the degree, up to a relative tolerance.
pub fn is_nondecreasing(values: &[f64], rel_tol: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] * (1.0 - rel_tol))
}

fn monotonicity_check(results: &[PoincareEntry], tol: f64) -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 0..3 {
        let seq: Vec<f64> = results.iter().map(|r| r.constants.get(n).and_then(|c| c.as_ref()).map_or(0.0, |c| c.constant)).collect();
        let mono = is_nondecreasing(&seq, tol);
        ok &= mono;
        detail.push(format!("c{n}: {seq:?}"));
    }
    check("nondecreasing_in_p", ok, detail.join(", "))
}

#[derive(Clone, Debug, Serialize)]
pub struct KornEntry {
    pub p: u32,
    pub gt: BoundarySelection,
    pub korn: KornSummary,
}

pub fn cmd_korn(cfg: &RunConfig) -> Result<Outcome> {
    let mut results = Vec::new();
    for p in cfg.degrees() {
        let k = korn_constant(p, cfg.gt)?;
        results.push(KornEntry {
            p,
            gt: cfg.gt,
            korn: KornSummary {
                constant: k.constant,
                min_ratio: k.min_ratio,
                admissible_dim: k.admissible_dim,
                rigid_motions: k.rigid_motions,
                extremal_ratio: k.extremal_ratio,
            },
        });
    }
    let seq: Vec<f64> = results.iter().map(|r| r.korn.constant).collect();
    let checks = vec![
        check(
            "finite_and_at_least_one",
            seq.iter().all(|c| c.is_finite() && *c >= 1.0 - cfg.check_tol),
            format!("{seq:?}"),
        ),
        check("nondecreasing_in_p", is_nondecreasing(&seq, cfg.check_tol), format!("{seq:?}")),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let mut csv = String::from("p,gt,korn,min_ratio,admissible_dim,rigid_motions\n");
    for r in &results {
        let _ = writeln!(
            csv,
            "{},{},{:.12e},{:.12e},{},{}",
            r.p, r.gt, r.korn.constant, r.korn.min_ratio, r.korn.admissible_dim, r.korn.rigid_motions
        );
    }
    #[derive(Serialize)]
    struct Results {
        entries: Vec<KornEntry>,
        checks: Vec<Check>,
    }
    let json = to_json(&Document { header: header(Command::Korn, cfg), passed, results: Results { entries: results, checks: checks.clone() } });
    Ok(Outcome { passed, json, csv, diagnostics: diagnostics(&checks) })
}

// ---------------------------------------------------------------- fixtures

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub source: String,
    pub dims: Vec<usize>,
    pub composition_defects: Vec<f64>,
    pub betti_numbers: Vec<usize>,
    pub rank_nullity_dims: Vec<usize>,
    pub helmholtz: Vec<HelmholtzSummary>,
    pub poincare: Vec<Option<ConstantSummary>>,
    pub mixed: Vec<MixedSummary>,
    pub decompositions: Vec<DecompositionChecks>,
    pub checks: Vec<Check>,
}

pub fn cmd_fixture(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.fixture.as_deref().ok_or_else(|| Error::Config("fixture command needs --fixture <path>".into()))?;
    let raw = load_fixture(path)?;
    let c = apply_weights(&raw, cfg.weights, cfg.seed)?;
    let tol = cfg.rank_tol();
    let defects: Vec<f64> = (0..c.num_spaces().saturating_sub(2)).map(|n| c.composition_defect(n)).collect();
    let max_defect = defects.iter().cloned().fold(0.0, f64::max);
    let mut checks = vec![check(
        "complex_property",
        max_defect <= cfg.defect_tol,
        defects.iter().enumerate().map(|(n, d)| format!("|A{} A{}|_max = {d:.3e}", n + 1, n)).collect::<Vec<_>>().join(", "),
    )];
    let mut report = FixtureReport {
        source: path.to_string(),
        dims: c.dims(),
        composition_defects: defects,
        betti_numbers: Vec::new(),
        rank_nullity_dims: Vec::new(),
        helmholtz: Vec::new(),
        poincare: Vec::new(),
        mixed: Vec::new(),
        decompositions: Vec::new(),
        checks: Vec::new(),
    };
    if checks[0].passed {
        for n in 0..c.num_spaces() {
            let h = cohomology(&c, n, tol)?;
            report.betti_numbers.push(h.dimension);
            report.rank_nullity_dims.push(h.rank_nullity_dimension);
            report.helmholtz.push(helmholtz_summary(&c, n, cfg.samples, cfg.seed, tol)?);
            report.decompositions.push(default_decomposition(&c, n, tol, 1e-8)?.checks);
        }
        report.poincare = constants(&poincare_report(&c, tol)?);
        report.mixed = mixed_all(&c, &report.poincare, cfg)?;
        let helm = report.helmholtz.iter().map(|h| h.max_reconstruction_residual.max(h.max_orthogonality_residual)).fold(0.0, f64::max);
        let sharp = report.poincare.iter().flatten().map(|c| c.sharpness_residual).fold(0.0, f64::max);
        let dec = report
            .decompositions
            .iter()
            .map(|d| d.harmonic_identity_defect.max(d.q1_idempotence).max(d.kernel_annihilation))
            .fold(0.0, f64::max);
        checks.push(check(
            "rank_nullity",
            report.betti_numbers == report.rank_nullity_dims,
            format!("{:?} vs {:?}", report.betti_numbers, report.rank_nullity_dims),
        ));
        checks.push(check("helmholtz", helm <= cfg.check_tol, format!("max residual {helm:.3e}")));
        checks.push(check("poincare_sharpness", sharp <= cfg.check_tol, format!("max residual {sharp:.3e}")));
        checks.push(check("mixed_estimate", report.mixed.iter().all(|m| m.all_hold), String::new()));
        checks.push(check("regular_decomposition", dec <= cfg.check_tol, format!("max defect {dec:.3e}")));
    }
    report.checks = checks.clone();
    let passed = checks.iter().all(|c| c.passed);
    let mut csv = String::from("source,dims,betti,max_defect,passed\n");
    let _ = writeln!(csv, "\"{}\",{},{},{:.3e},{}", path, list(&report.dims), list(&report.betti_numbers), max_defect, passed);
    let json = to_json(&Document { header: header(Command::Fixture, cfg), passed, results: report });
    Ok(Outcome { passed, json, csv, diagnostics: diagnostics(&checks) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let c = RunConfig::from_json(r#"{"seed": 7, "gt": "X0,X1", "weights": "random"}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.gt.to_string(), "X0,X1");
        assert_eq!(c.weights, WeightMode::RandomSpd);
        assert_eq!(c.trials, 20);
        assert!(matches!(RunConfig::from_json(r#"{"sede": 7}"#), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_json("{"), Err(Error::Config(_))));
    }

    #[test]
    fn degree_sweep() {
        let c = RunConfig { p: 4, p_max: Some(6), ..RunConfig::default() };
        assert_eq!(c.degrees(), vec![4, 5, 6]);
        assert_eq!(RunConfig::default().degrees(), vec![4]);
    }

    #[test]
    fn monotonicity_tolerance() {
        assert!(is_nondecreasing(&[1.0, 1.0 - 1e-14, 2.0], 1e-10));
        assert!(!is_nondecreasing(&[1.0, 0.9], 1e-10));
    }

    #[test]
    fn identity_run_is_deterministic() {
        let cfg = RunConfig { only: vec!["ELA-A03".into()], trials: 3, ..RunConfig::default() };
        let a = run(Command::VerifyIdentities, &cfg).unwrap();
        let b = run(Command::VerifyIdentities, &cfg).unwrap();
        assert!(a.passed);
        assert_eq!(a.json, b.json);
        assert_eq!(a.json.lines().count(), 3);
    }
}

//! Subcommand implementations.

use kmsdb::analysis::{self, QuantumDynamics, SweepConfig, SweepPoint, SweepSummary};
use kmsdb::balance;
use kmsdb::classical::{self, Laplacian, RMatrix};
use kmsdb::cpmap::{self, CPMap};
use kmsdb::dynamics::{self, Provenance};
use kmsdb::hamiltonian::{GibbsState, HamiltonianModel};
use kmsdb::linalg::{self, c};
use kmsdb::profile::WeightProfile;
use kmsdb::random;
use kmsdb::serial::MatrixJson;
use kmsdb::timedomain::{self, FourierPair};
use rayon::prelude::*;
use serde::Serialize;

use crate::resolve::{self, Config, Report, Setup, Tolerances};
use crate::{CliError, Format, MixArgs, ModelArgs, OracleArgs, OutputArgs, SweepArgs, Verdict};

/// One thresholded measurement.
#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, relation: "<=", tolerance, pass: measured <= tolerance }
    }

    fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, relation: ">=", tolerance, pass: measured >= tolerance }
    }
}

fn verdict(checks: &[Check]) -> Verdict {
    if checks.iter().all(|c| c.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Transition part 𝓣 = construction(Σ_a A^a[·]A^a†).
fn transition(setup: &Setup, sigma: f64) -> Result<CPMap, CliError> {
    let inst = &setup.instance;
    if inst.jumps.is_empty() {
        return Ok(CPMap::zero(inst.h.dim()));
    }
    Ok(setup.construction.build(&inst.transition_map()?, &inst.h, &setup.profile, sigma)?)
}

fn gap_of(dynamics: &QuantumDynamics, rho: &GibbsState) -> (Option<f64>, Vec<String>) {
    match analysis::spectral_gap(dynamics, rho) {
        Ok(g) => (Some(g.gap), g.notes),
        Err(e) => (None, vec![format!("gap unavailable: {e}")]),
    }
}

#[derive(Serialize)]
struct TransitionReport {
    norm: f64,
    trace_operator_norm: f64,
    db_residual: f64,
    kraus_count: usize,
}

#[derive(Serialize)]
struct GeneratorReport {
    db_residual: f64,
    trace_residual: f64,
    fixed_point_residual: f64,
    gap: Option<f64>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct VerifyBody {
    dim: usize,
    transition: TransitionReport,
    lindbladian: GeneratorReport,
    channel: Option<cpmap::VerificationReport>,
    checks: Vec<Check>,
    pass: bool,
}

pub fn verify(a: &ModelArgs) -> Result<Verdict, CliError> {
    resolve::require_json(&a.output, "verify")?;
    let setup = Setup::new(a)?;
    let (h, rho) = (&setup.instance.h, &setup.instance.rho);
    let tol = a.output.tol;
    let t = transition(&setup, a.sigma)?;
    let norm = t.norm();
    let t_report = TransitionReport {
        norm,
        trace_operator_norm: linalg::hermitian_norm(&t.trace_operator()),
        db_residual: cpmap::db_residual(&t, rho),
        kraus_count: t.kraus_count(),
    };
    let mut checks = vec![Check::at_most("transition.db_residual", t_report.db_residual, tol * norm.max(1.0))];

    let l = dynamics::lindblad_from_cp(&t, h, rho)?;
    let (gap, notes) = gap_of(&QuantumDynamics::from(&l), rho);
    let l_report = GeneratorReport {
        db_residual: cpmap::db_residual_superop(&l.superop, rho),
        trace_residual: l.trace_residual(),
        fixed_point_residual: linalg::op_norm(&l.apply(rho.rho())),
        gap,
        notes,
    };
    let l_scale = linalg::op_norm(&l.superop).max(1.0);
    checks.push(Check::at_most("lindbladian.db_residual", l_report.db_residual, tol * l_scale));
    checks.push(Check::at_most("lindbladian.trace_residual", l_report.trace_residual, tol * l_scale));
    checks.push(Check::at_most("lindbladian.fixed_point_residual", l_report.fixed_point_residual, tol * l_scale));

    let channel = match setup.discrete {
        None => None,
        Some(scheme) => {
            let (ch, notes) = analysis::lattice_channel(&setup.instance, setup.construction, &setup.profile, a.sigma, scheme)?;
            let (gap, gap_notes) = gap_of(&QuantumDynamics::Channel(ch.map.clone()), rho);
            let mut report = cpmap::cptp_check(&ch.map);
            report.db_residual = cpmap::db_residual(&ch.map, rho);
            report.fixed_point_residual = linalg::op_norm(&(ch.map.apply(rho.rho()) - rho.rho()));
            report.gap = gap;
            report.notes = notes.into_iter().chain(gap_notes).collect();
            checks.push(Check::at_most("channel.db_residual", report.db_residual, tol));
            checks.push(Check::at_most("channel.trace_residual", report.trace_residual, tol));
            checks.push(Check::at_least("channel.cp_min_eig", report.cp_min_eig, -tol));
            checks.push(Check::at_most("channel.fixed_point_residual", report.fixed_point_residual, tol));
            Some(report)
        }
    };
    let result = verdict(&checks);
    let body = VerifyBody {
        dim: h.dim(),
        transition: t_report,
        lindbladian: l_report,
        channel,
        pass: matches!(result, Verdict::Pass),
        checks,
    };
    let report = Report::new("verify", setup.config(a), Tolerances::uniform(tol), body);
    resolve::emit_json(&a.output, "verify", &report)?;
    Ok(result)
}

#[derive(Serialize)]
struct MapJson {
    kraus: Vec<MatrixJson>,
    superop: MatrixJson,
}

impl MapJson {
    fn of(map: &CPMap) -> Self {
        MapJson { kraus: map.kraus().iter().map(MatrixJson::from_matrix).collect(), superop: MatrixJson::from_matrix(map.superop()) }
    }
}

#[derive(Serialize)]
struct ChannelJson {
    provenance: Provenance,
    map: MapJson,
    reject: Vec<MatrixJson>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct ConstructBody {
    dim: usize,
    transition: MapJson,
    channel: Option<ChannelJson>,
}

pub fn construct(a: &ModelArgs) -> Result<Verdict, CliError> {
    resolve::require_json(&a.output, "construct")?;
    let setup = Setup::new(a)?;
    let t = transition(&setup, a.sigma)?;
    let channel = match setup.discrete {
        None => None,
        Some(scheme) => {
            let (ch, notes) = analysis::lattice_channel(&setup.instance, setup.construction, &setup.profile, a.sigma, scheme)?;
            Some(ChannelJson {
                provenance: ch.provenance,
                map: MapJson::of(&ch.map),
                reject: ch.reject.iter().map(MatrixJson::from_matrix).collect(),
                notes,
            })
        }
    };
    let body = ConstructBody { dim: setup.instance.h.dim(), transition: MapJson::of(&t), channel };
    let report = Report::new("construct", setup.config(a), Tolerances::uniform(a.output.tol), body);
    resolve::emit_json(&a.output, "construct", &report)?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct SweepConfigJson {
    #[serde(flatten)]
    base: Config,
    betas: Vec<f64>,
    mixing: bool,
    jobs: usize,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    summary: &'a SweepSummary,
    points: &'a [SweepPoint],
}

pub fn gap_sweep(a: &SweepArgs) -> Result<Verdict, CliError> {
    let m = &a.model;
    let setup = Setup::new(m)?;
    let betas = resolve::grid(&a.betas, "beta")?;
    if a.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    if let Some(l) = setup.spec.sites() {
        if l > 5 {
            return Err(kmsdb::Error::Size(format!("gap sweeps support at most 5 sites, got {l}")).into());
        }
    }
    let cfg = SweepConfig {
        model: setup.spec.clone(),
        construction: setup.construction,
        profile: setup.profile_arg.clone(),
        sigma: m.sigma,
        betas: betas.clone(),
        discrete: setup.discrete.unwrap_or(analysis::DiscreteScheme::Exact),
        jumps: setup.jumps,
        mixing: a.mixing,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::new("io", e.to_string()))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        betas.par_iter().map(|&b| analysis::sweep_point(&cfg, b)).collect::<kmsdb::Result<Vec<_>>>()
    })?;
    let summary = analysis::summarize(&points);
    let mut base = setup.config(m);
    base.discrete = Some(cfg.discrete.label());
    let config = SweepConfigJson { base, betas, mixing: a.mixing, jobs: a.jobs };
    let report = Report::new("gap-sweep", config, Tolerances::uniform(m.output.tol), SweepBody { summary: &summary, points: &points });
    match m.output.format {
        Format::Json => resolve::emit_json(&m.output, "gap_sweep", &report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &points {
                w.serialize(&p.row)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::new("io", e.to_string()))?;
            let text = String::from_utf8(bytes).map_err(|e| CliError::new("io", e.to_string()))?;
            resolve::emit_csv(&m.output, "gap_sweep", &text, &report)?;
        }
    }
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct MixConfigJson {
    #[serde(flatten)]
    base: Config,
    times: Vec<f64>,
}

pub fn mix(a: &MixArgs) -> Result<Verdict, CliError> {
    let m = &a.model;
    let setup = Setup::new(m)?;
    let times = resolve::grid(&a.times, "time")?;
    let inst = &setup.instance;
    let dynamics = match setup.discrete {
        None => {
            let t = transition(&setup, m.sigma)?;
            QuantumDynamics::from(&dynamics::lindblad_from_cp(&t, &inst.h, &inst.rho)?)
        }
        Some(scheme) => {
            let (ch, _) = analysis::lattice_channel(inst, setup.construction, &setup.profile, m.sigma, scheme)?;
            QuantumDynamics::Channel(ch.map)
        }
    };
    let initial = analysis::default_initial_states(inst.h.dim());
    let mix = analysis::mixing_sim(&dynamics, &inst.rho, &initial, &times)?;
    let config = MixConfigJson { base: setup.config(m), times };
    match m.output.format {
        Format::Json => {
            let report = Report::new("mix", config, Tolerances::uniform(m.output.tol), &mix);
            resolve::emit_json(&m.output, "mix", &report)?;
        }
        Format::Csv => {
            let mut header = vec!["time".to_string()];
            header.extend(mix.labels.iter().cloned());
            if mix.lazy.is_some() {
                header.extend(mix.labels.iter().map(|l| format!("lazy_{l}")));
            }
            let rows: Vec<Vec<String>> = (0..mix.times.len())
                .map(|k| {
                    let mut row = vec![mix.times[k].to_string()];
                    row.extend(mix.curves.iter().map(|cv| cv[k].to_string()));
                    if let Some(lazy) = &mix.lazy {
                        row.extend(lazy.iter().map(|cv| cv[k].to_string()));
                    }
                    row
                })
                .collect();
            let text = resolve::csv_from_records(&header, &rows)?;
            // The sidecar carries everything except the curves themselves.
            let summary = serde_json::json!({
                "labels": mix.labels,
                "mixing_time": mix.mixing_time,
                "fitted_rate": mix.fitted_rate,
                "gap": mix.gap,
                "notes": mix.notes,
            });
            let report = Report::new("mix", config, Tolerances::uniform(m.output.tol), summary);
            resolve::emit_csv(&m.output, "mix", &text, &report)?;
        }
    }
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct OracleConfig {
    seed: u64,
    format: Format,
}

#[derive(Serialize)]
struct OracleBody {
    checks: Vec<Check>,
    pass: bool,
}

/// Time-domain integrals against the Schur-multiplier forms of 𝒮 and 𝒮_c.
fn time_domain_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = random::rng(seed);
    let mut checks = Vec::new();
    let mut worst_s: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for k in 0..5 {
        let d = 2 + k % 5;
        let h = random::hamiltonian(&mut rng, d, 0.5, 5.0)?;
        let m = random::unit_matrix(&mut rng, d);
        for eps in [0.1, 0.01] {
            let approx = timedomain::s_truncated(&m, &h, eps)?.value;
            worst_s = worst_s.max(linalg::op_norm(&(approx - balance::s_map(&m, &h))) / eps);
        }
        let sc = timedomain::s_c_integral(&m, &h, 4.0)?.value;
        worst_c = worst_c.max(linalg::op_norm(&(sc - balance::s_c(&m, &h))));
    }
    checks.push(Check::at_most("time-domain.s_truncated_over_eps", worst_s, 0.5));
    checks.push(Check::at_most("time-domain.s_c", worst_c, 1e-9));
    Ok(checks)
}

fn commuting_instance(energies: &[f64], rates: &RMatrix) -> Result<(HamiltonianModel, GibbsState, CPMap, Laplacian), CliError> {
    let d = energies.len();
    let h = HamiltonianModel::diagonal(energies)?;
    let rho = GibbsState::new(&h);
    let mut kraus = Vec::new();
    let mut lap = RMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i != j && rates[(i, j)] > 0.0 {
                kraus.push(linalg::ketbra(d, i, j) * c(rates[(i, j)].sqrt(), 0.0));
                lap[(i, j)] = rates[(i, j)];
                lap[(j, j)] -= rates[(i, j)];
            }
        }
    }
    Ok((h, rho, CPMap::from_kraus_dim(d, kraus)?, Laplacian::new(lap)?))
}

/// Population block of the Lindbladian against the classical generalized
/// rule, for commuting (diagonal) instances.
fn classical_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = random::rng(seed.wrapping_add(1));
    type Rule = fn(f64) -> f64;
    let rules: [(&str, WeightProfile, Rule); 2] = [
        ("metropolis", WeightProfile::metropolis(), classical::g_metropolis),
        ("glauber", WeightProfile::glauber(), classical::g_glauber),
    ];
    let mut worst = [0.0f64; 2];
    for d in 2..=5usize {
        let energies: Vec<f64> = (0..d).map(|_| 4.0 * random::ginibre(&mut rng, 1, 1)[(0, 0)].re).collect();
        let mut rates = RMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let r = random::ginibre(&mut rng, 1, 1)[(0, 0)].norm();
                rates[(i, j)] = r;
                rates[(j, i)] = r;
            }
        }
        let (h, rho, t, lap) = commuting_instance(&energies, &rates)?;
        let v: Vec<f64> = energies.iter().map(|e| (-e).exp()).collect();
        for (slot, (_, gamma, g)) in rules.iter().enumerate() {
            let expected = classical::generalized_rule(&lap, &v, g)?;
            for q in [balance::davies(&t, &h, gamma)?, balance::coherent(&t, &h, &gamma.as_amplitude()?)?] {
                let l = dynamics::lindblad_from_cp(&q, &h, &rho)?;
                let pop = RMatrix::from_fn(d, d, |i, j| l.superop[(i * d + i, j * d + j)].re);
                worst[slot] = worst[slot].max((pop - expected.matrix()).amax());
            }
        }
    }
    let mut checks: Vec<Check> = rules
        .iter()
        .zip(worst)
        .map(|((name, _, _), w)| Check::at_most(&format!("classical.{name}"), w, 1e-10))
        .collect();
    let sym = (0..20)
        .map(|k| {
            let nu = -6.0 + 12.0 * k as f64 / 19.0;
            let gm = classical::gaussian_uncertain_gamma(-nu, 0.8);
            (nu.exp() * classical::gaussian_uncertain_gamma(nu, 0.8) - gm).abs() / gm
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("classical.gaussian_uncertain_symmetry", sym, 1e-12));
    Ok(checks)
}

fn fourier_checks() -> Result<Vec<Check>, CliError> {
    FourierPair::ALL
        .iter()
        .map(|p| Ok(Check::at_most(&format!("fourier.{}", p.name()), timedomain::fourier_pair_check(*p, &p.default_grid())?, 1e-6)))
        .collect()
}

pub fn oracle(a: &OracleArgs) -> Result<Verdict, CliError> {
    let out: &OutputArgs = &a.output;
    let mut checks = time_domain_checks(out.seed)?;
    checks.extend(classical_checks(out.seed)?);
    checks.extend(fourier_checks()?);
    let result = verdict(&checks);
    let config = OracleConfig { seed: out.seed, format: out.format };
    let body = OracleBody { pass: matches!(result, Verdict::Pass), checks };
    let report = Report::new("oracle", config, Tolerances::uniform(out.tol), body);
    match out.format {
        Format::Json => resolve::emit_json(out, "oracle", &report)?,
        Format::Csv => {
            let header: Vec<String> = ["name", "measured", "relation", "tolerance", "pass"].map(String::from).to_vec();
            let rows: Vec<Vec<String>> = report
                .body
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), c.measured.to_string(), c.relation.into(), c.tolerance.to_string(), c.pass.to_string()])
                .collect();
            let text = resolve::csv_from_records(&header, &rows)?;
            resolve::emit_csv(out, "oracle", &text, &report)?;
        }
    }
    Ok(result)
}

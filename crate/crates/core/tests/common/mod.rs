//! Shared fixtures and independent reference evaluations for the
//! integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use ismuc::channels::{generate_channels, los_steering, ChannelModelSpec, DEFAULT_IRS_EXPONENT};
use ismuc::experiments::{brute_force_oracle, OracleSpec};
use ismuc::linalg::{self, cvec, CMatrix, CVector, C64};
use ismuc::model::{self, BeamformingSolution, ChannelSet, ReflectVector, SystemConfig, User};
use ismuc::optimizer::{self, DinkelbachConfig, Scenario, SubproblemMatrices};
use ismuc::sdp::{self, embed_hermitian, AffineExpr, Coefficient, Relation, SdpProblem};
use ismuc::srocr::{self, SrocrConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CVector {
    CVector::from_iterator(
        n,
        (0..n).map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale),
    )
}

pub struct Instance {
    pub channels: ChannelSet,
    pub reflect: ReflectVector,
    pub w_u: CVector,
    pub w_m: CVector,
    pub scenario: Scenario,
    pub q: f64,
}

/// Random channels, phases, beamformers and scenario scalars.
pub fn random_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(1..=6);
    let k = r.gen_range(1..=8);
    let mut scale = || 10f64.powf(r.gen_range(-1.0..1.0));
    let (s1, s2, s3, s4, s5) = (scale(), scale(), scale(), scale(), scale());
    let mut r = rng(seed ^ 0x5eed);
    let g = CMatrix::from_fn(k, n, |_, _| {
        C64::new(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)) * s1
    });
    let channels = ChannelSet {
        g_bs_irs: g,
        h_bs_nu: gaussian(&mut r, n, s2),
        h_bs_fu: gaussian(&mut r, n, s3),
        h_irs_nu: gaussian(&mut r, k, s4),
        h_irs_fu: gaussian(&mut r, k, s5),
    };
    let reflect = ReflectVector::from_phases((0..k).map(|_| r.gen_range(0.0..2.0 * PI)));
    let w_u = gaussian(&mut r, n, 0.5);
    let w_m = gaussian(&mut r, n, 0.5);
    let scenario = Scenario {
        p_max: r.gen_range(0.5..2.0),
        sigma2_nu: r.gen_range(0.1..2.0),
        sigma2_fu: r.gen_range(0.1..2.0),
        zeta: r.gen_range(0.0..0.5),
        gamma: r.gen_range(0.0..1.0),
        gamma_bar: r.gen_range(0.0..3.0),
    };
    Instance { channels, reflect, w_u, w_m, scenario, q: r.gen_range(0.0..5.0) }
}

/// `h^H w` by explicit summation of `sum_k conj(h_I,k) e^{j theta_k} (G w)_k + h_B^H w`.
pub fn direct_amplitude(ch: &ChannelSet, phases: &[f64], user: User, w: &CVector) -> C64 {
    let (h_irs, h_bs) = match user {
        User::Near => (&ch.h_irs_nu, &ch.h_bs_nu),
        User::Far => (&ch.h_irs_fu, &ch.h_bs_fu),
    };
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..phases.len() {
        let mut gw = C64::new(0.0, 0.0);
        for i in 0..w.len() {
            gw += ch.g_bs_irs[(k, i)] * w[i];
        }
        acc += h_irs[k].conj() * C64::from_polar(1.0, phases[k]) * gw;
    }
    for i in 0..w.len() {
        acc += h_bs[i].conj() * w[i];
    }
    acc
}

pub fn direct_gain(ch: &ChannelSet, phases: &[f64], user: User, w: &CVector) -> f64 {
    direct_amplitude(ch, phases, user, w).norm_sqr()
}

fn rel_err(value: f64, reference: f64, magnitude: f64) -> f64 {
    (value - reference).abs() / magnitude.max(f64::MIN_POSITIVE)
}

/// Largest relative disagreement between every lifted/assembled quadratic
/// form and the direct evaluation at the instance's operating point.
pub fn lift_consistency_error(inst: &Instance) -> f64 {
    let ch = &inst.channels;
    let ph = inst.reflect.phases();
    let s = &inst.scenario;
    let m = SubproblemMatrices::new(ch, &inst.reflect, &inst.w_u, &inst.w_m, s).unwrap();
    let nu_u = direct_gain(ch, ph, User::Near, &inst.w_u);
    let nu_m = direct_gain(ch, ph, User::Near, &inst.w_m);
    let fu_u = direct_gain(ch, ph, User::Far, &inst.w_u);
    let fu_m = direct_gain(ch, ph, User::Far, &inst.w_m);
    let vbar = inst.reflect.lifted();
    let quad = |x: &CMatrix| vbar.dotc(&(x * &vbar)).re;
    let wu = linalg::outer(&inst.w_u, &inst.w_u);
    let wm = linalg::outer(&inst.w_m, &inst.w_m);
    let tr = |a: &CMatrix, b: &CMatrix| linalg::trace_product(a, b).re;

    let mut worst = 0.0f64;
    let mut check =
        |value: f64, reference: f64, magnitude: f64| worst = worst.max(rel_err(value, reference, magnitude));

    // Lifted blocks plus constants.
    check(quad(&m.r_nu.block()) + m.a_nu, nu_u, nu_u);
    check(quad(&m.r_nm.block()) + m.a_nm, nu_m, nu_m);
    check(quad(&m.r_fu.block()) + m.r_fu.direct, fu_u, fu_u);
    check(quad(&m.r_fm.block()) + m.r_fm.direct, fu_m, fu_m);
    check(quad(&m.illumination), fu_u + fu_m, fu_u + fu_m);
    // Effective-channel outer products.
    check(tr(&m.h_nu, &wu), nu_u, nu_u);
    check(tr(&m.h_nu, &wm), nu_m, nu_m);
    check(tr(&m.h_fu, &wu), fu_u, fu_u);
    check(tr(&m.h_fu, &wm), fu_m, fu_m);

    let gb = s.gamma_bar;
    let objective = nu_u - inst.q * (s.zeta * nu_m + s.sigma2_nu);
    let obj_mag = nu_u + inst.q * (s.zeta * nu_m + s.sigma2_nu);
    let mc_nu = nu_m - gb * nu_u - gb * s.sigma2_nu;
    let mc_nu_mag = nu_m + gb * nu_u + gb * s.sigma2_nu;
    let mc_fu = fu_m - gb * fu_u - gb * s.sigma2_fu;
    let mc_fu_mag = fu_m + gb * fu_u + gb * s.sigma2_fu;
    let illum = fu_u + fu_m - s.gamma;
    let illum_mag = fu_u + fu_m + s.gamma;

    // Transmit relaxation at the rank-one point.
    let t = optimizer::build_transmit_subproblem(inst.q, &m, s);
    let values = [wu.clone(), wm.clone()];
    let res = t.residuals(&values);
    let power = inst.w_u.norm_squared() + inst.w_m.norm_squared();
    check(t.objective_value(&values), objective, obj_mag);
    check(res[0], s.p_max - power, s.p_max + power);
    check(res[1], mc_nu, mc_nu_mag);
    check(res[2], mc_fu, mc_fu_mag);
    check(res[3], illum, illum_mag);

    // Reflect relaxation at the lifted point.
    let r = optimizer::build_reflect_subproblem(inst.q, &m, s);
    let v = [linalg::outer(&vbar, &vbar)];
    let res = r.residuals(&v);
    check(r.objective_value(&v), objective, obj_mag);
    check(res[0], mc_nu, mc_nu_mag);
    check(res[1], mc_fu, mc_fu_mag);
    check(res[2], illum, illum_mag);
    for pin in &res[3..] {
        check(*pin, 0.0, 1.0);
    }
    worst
}

/// Default system with tiny dimensions for quick end-to-end runs.
pub fn tiny_config(seed: u64) -> SystemConfig {
    SystemConfig { n_antennas: 2, n_elements: 2, seed, ..SystemConfig::default() }
}

pub fn channels(config: &SystemConfig) -> ChannelSet {
    generate_channels(config, &ChannelModelSpec::from_config(config, DEFAULT_IRS_EXPONENT), config.seed).unwrap()
}

fn no_irs(h_nu: CVector, h_fu: CVector) -> ChannelSet {
    let n = h_nu.len();
    ChannelSet {
        g_bs_irs: CMatrix::zeros(0, n),
        h_bs_nu: h_nu,
        h_bs_fu: h_fu,
        h_irs_nu: CVector::zeros(0),
        h_irs_fu: CVector::zeros(0),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

/// Every closed-form, structural and definitional example, each as a named
/// pass/fail result.
pub fn trivial_checks() -> Vec<(&'static str, bool)> {
    let mut out: Vec<(&'static str, bool)> = Vec::new();
    let e1 = linalg::basis(2, 0);
    let zero = CVector::zeros(2);
    let none = ReflectVector::from_phases(Vec::<f64>::new());

    // Effective channels.
    let h_b = cvec(&[(0.3, -0.2), (1.0, 0.5)]);
    let ch0 = no_irs(h_b.clone(), h_b.clone());
    out.push((
        "no IRS effective channel is the direct link",
        model::effective_channel(&ch0, &none, User::Near).unwrap() == h_b,
    ));
    let zero_ch = ChannelSet {
        g_bs_irs: CMatrix::zeros(3, 2),
        h_bs_nu: zero.clone(),
        h_bs_fu: zero.clone(),
        h_irs_nu: CVector::zeros(3),
        h_irs_fu: CVector::zeros(3),
    };
    let v3 = ReflectVector::from_phases([0.1, 0.2, 0.3]);
    out.push((
        "all-zero channels give a zero effective channel",
        model::effective_channel(&zero_ch, &v3, User::Far).unwrap().iter().all(|z| *z == C64::new(0.0, 0.0)),
    ));

    // Rates.
    let ch = no_irs(e1.clone(), e1.clone());
    let p: f64 = 7.0;
    let w = &e1 * C64::new(p.sqrt(), 0.0);
    out.push((
        "zero unicast beamformer gives zero unicast rate",
        model::unicast_rate(&ch, &none, &zero, &e1, 0.1, 1.0).unwrap() == 0.0,
    ));
    out.push((
        "scalar AWGN unicast rate is log2(1 + P)",
        close(model::unicast_rate(&ch, &none, &w, &zero, 0.3, 1.0).unwrap(), (1.0 + p).log2()),
    ));
    out.push((
        "zero multicast beamformer gives zero NU multicast rate",
        model::multicast_rate_nu(&ch, &none, &e1, &zero, 1.0).unwrap() == 0.0,
    ));
    out.push((
        "NU multicast rate at SNR 1 is one bit",
        close(model::multicast_rate_nu(&ch, &none, &zero, &e1, 1.0).unwrap(), 1.0),
    ));
    let a = cvec(&[(0.4, 0.1), (0.2, -0.3)]);
    let b = cvec(&[(-0.7, 0.2), (0.5, 0.5)]);
    let (ga, gb) = (a[0].norm_sqr(), b[0].norm_sqr());
    out.push((
        "swapping the streams exchanges signal and interference",
        close(model::multicast_rate_nu(&ch, &none, &a, &b, 0.4).unwrap(), (1.0 + gb / (ga + 0.4)).log2())
            && close(model::multicast_rate_nu(&ch, &none, &b, &a, 0.4).unwrap(), (1.0 + ga / (gb + 0.4)).log2()),
    ));
    out.push((
        "zero multicast beamformer gives zero FU multicast rate",
        model::multicast_rate_fu(&ch, &none, &e1, &zero, 1.0).unwrap() == 0.0,
    ));
    out.push((
        "FU multicast rate at SNR 1 is one bit",
        close(model::multicast_rate_fu(&ch, &none, &zero, &e1, 1.0).unwrap(), 1.0),
    ));
    out.push((
        "FU swap exchanges signal and interference",
        close(model::multicast_rate_fu(&ch, &none, &a, &b, 0.4).unwrap(), (1.0 + gb / (ga + 0.4)).log2())
            && close(model::multicast_rate_fu(&ch, &none, &b, &a, 0.4).unwrap(), (1.0 + ga / (gb + 0.4)).log2()),
    ));
    out.push(("min(3, 2) = 2", model::multicast_rate(3.0, 2.0) == 2.0));
    out.push(("min(2, 2) = 2", model::multicast_rate(2.0, 2.0) == 2.0));
    out.push(("min(0, x) = 0", model::multicast_rate(0.0, 5.0) == 0.0));
    out.push((
        "zero beamformers illuminate nothing",
        model::illumination_power(&ch, &none, &zero, &zero).unwrap() == 0.0,
    ));
    out.push((
        "unit multicast beam on unit channel illuminates 1 W",
        close(model::illumination_power(&ch, &none, &zero, &e1).unwrap(), 1.0),
    ));

    // Feasibility.
    let cfg = SystemConfig {
        n_antennas: 2,
        n_elements: 0,
        p_max: 1.0,
        sigma2_nu: 1.0,
        sigma2_fu: 1.0,
        gamma: 0.0,
        ..SystemConfig::default()
    };
    let zero_sol = BeamformingSolution { w_u: zero.clone(), w_m: zero.clone(), reflect: none.clone() };
    let rep = model::check_feasibility(&cfg, &ch, &zero_sol, 1e-6).unwrap();
    out.push(("zero beamformers violate the multicast floor", !rep.feasible && rep.multicast_rate < 0.0));
    let raw = BeamformingSolution { w_u: a.clone(), w_m: b.clone(), reflect: none.clone() };
    let scale = (cfg.p_max / raw.transmit_power()).sqrt();
    let full =
        BeamformingSolution { w_u: &a * C64::new(scale, 0.0), w_m: &b * C64::new(scale, 0.0), reflect: none.clone() };
    out.push((
        "full-power solution has zero power residual",
        model::check_feasibility(&cfg, &ch, &full, 1e-6).unwrap().transmit_power.abs() < 1e-15,
    ));

    // Channels.
    let sys = SystemConfig::default();
    out.push(("same seed gives bit-identical channels", channels(&sys) == channels(&sys)));
    out.push(("steering at angle 0 is all ones", los_steering(5, 0.0).iter().all(|z| *z == C64::new(1.0, 0.0))));
    out.push((
        "steering entries are unit modulus",
        los_steering(9, 0.77).iter().all(|z| (z.norm() - 1.0).abs() < 1e-15),
    ));
    let s2 = los_steering(2, FRAC_PI_2);
    out.push((
        "two-element steering at pi/2 is [1, e^{j pi}]",
        s2[0] == C64::new(1.0, 0.0) && (s2[1] - C64::from_polar(1.0, PI)).norm() < 1e-15,
    ));

    // Real embedding and SDP.
    let eye = CMatrix::identity(3, 3);
    out.push(("identity embeds to identity", embed_hermitian(&eye) == nalgebra::DMatrix::<f64>::identity(6, 6)));
    let x = linalg::hermitian_part(&CMatrix::from_fn(3, 3, |i, j| {
        C64::new((i + 2 * j) as f64, (i as f64) - (j as f64) * 0.5)
    }));
    let ev = linalg::hermitian_eigenvalues(&x);
    let mut doubled: Vec<f64> = ev.iter().flat_map(|&l| [l, l]).collect();
    let mut emb = embed_hermitian(&x).symmetric_eigen().eigenvalues.as_slice().to_vec();
    emb.sort_by(f64::total_cmp);
    doubled.sort_by(f64::total_cmp);
    out.push(("embedding doubles every eigenvalue", emb.iter().zip(&doubled).all(|(a, b)| (a - b).abs() < 1e-10)));
    let mut trace_sdp = SdpProblem::new();
    let xv = trace_sdp.add_variable("X", 2);
    trace_sdp.set_objective(AffineExpr::new().term(xv, Coefficient::identity(1.0)));
    trace_sdp.add_constraint("budget", AffineExpr::new().term(xv, Coefficient::identity(1.0)), Relation::LessEq, 1.0);
    let sol = sdp::solve(&trace_sdp).unwrap();
    out.push(("max Tr(X) s.t. Tr(X) <= 1 is 1", sol.is_optimal() && (sol.objective - 1.0).abs() < 1e-7));

    // Rank tightening.
    let mut r1 = SdpProblem::new();
    let wv = r1.add_variable("W", 2);
    r1.set_objective(AffineExpr::new().term(wv, Coefficient::outer(cvec(&[(1.0, 0.5), (0.0, -1.0)]), 1.0)));
    r1.add_constraint("power", AffineExpr::new().term(wv, Coefficient::identity(1.0)), Relation::LessEq, 1.0);
    let run = srocr::srocr_run(&r1, &["W"], &SrocrConfig::default()).unwrap();
    out.push((
        "rank-one relaxation stops after one tightening",
        run.state.iteration == 1 && run.state.tracked[0].m_accepted >= 0.99 && !run.state.rank_not_reached,
    ));
    let u = cvec(&[(0.6, 0.0), (0.0, 0.8)]);
    out.push(("rank ratio of u u^H is 1", close(srocr::rank_ratio(&linalg::outer(&u, &u)).unwrap(), 1.0)));
    out.push(("rank ratio of I_2 is 1/2", close(srocr::rank_ratio(&CMatrix::identity(2, 2)).unwrap(), 0.5)));
    let d31 = CMatrix::from_diagonal(&cvec(&[(3.0, 0.0), (1.0, 0.0)]));
    out.push(("rank ratio of diag(3, 1) is 3/4", close(srocr::rank_ratio(&d31).unwrap(), 0.75)));
    let (lam, vec) = srocr::principal_eigpair(&CMatrix::from_diagonal(&cvec(&[(2.0, 0.0), (1.0, 0.0)])));
    out.push((
        "principal pair of diag(2, 1) is (2, e1)",
        close(lam, 2.0) && (vec - linalg::basis(2, 0)).norm() < 1e-12,
    ));
    let mut ru = cvec(&[(0.3, 0.4), (-0.5, 0.2), (0.1, -0.6)]);
    ru.unscale_mut(ru.norm());
    let (lam, vec) = srocr::principal_eigpair(&linalg::outer(&ru, &ru));
    let mut expected = ru.clone();
    linalg::fix_phase(&mut expected);
    out.push(("principal pair of u u^H is (1, u) up to phase", close(lam, 1.0) && (vec - expected).norm() < 1e-10));

    // Optimizer structure.
    let cfg = tiny_config(3);
    let set = channels(&cfg);
    let sol = BeamformingSolution {
        w_u: cvec(&[(1e-2, 0.0), (0.0, 2e-2)]),
        w_m: cvec(&[(3e-2, 1e-2), (0.0, 0.0)]),
        reflect: ReflectVector::from_phases([1.0, 2.0]),
    };
    let q = optimizer::dinkelbach_ratio(&cfg, &set, &sol).unwrap();
    let h = model::effective_channel(&set, &sol.reflect, User::Near).unwrap();
    let ratio = h.dotc(&sol.w_u).norm_sqr() / (cfg.zeta * h.dotc(&sol.w_m).norm_sqr() + cfg.sigma2_nu);
    out.push(("fixed beamformers give q = U / M", close(q, ratio)));

    let cfg0 = cfg.without_irs();
    let set0 = channels(&cfg0);
    let (start, _) = optimizer::dinkelbach_solve(&cfg0, &set0, &DinkelbachConfig::default()).unwrap();
    let step = optimizer::ao_step(&cfg0, &set0, 0.0, &start, &DinkelbachConfig::default()).unwrap();
    out.push((
        "without an IRS the phase update is skipped",
        !step.reflect_accepted && step.solution.reflect.is_empty(),
    ));

    let inst = random_instance(11);
    let m = SubproblemMatrices::new(
        &inst.channels,
        &inst.reflect,
        &inst.w_u,
        &inst.w_m,
        &Scenario { zeta: 0.0, ..inst.scenario },
    )
    .unwrap();
    let t = optimizer::build_transmit_subproblem(1.5, &m, &Scenario { zeta: 0.0, ..inst.scenario });
    out.push((
        "perfect SIC removes the multicast term from the objective",
        t.objective.terms.iter().all(|term| term.var == 0),
    ));
    let s0 = Scenario { gamma_bar: 0.0, ..inst.scenario };
    let m0 = SubproblemMatrices::new(&inst.channels, &inst.reflect, &inst.w_u, &inst.w_m, &s0).unwrap();
    let t0 = optimizer::build_transmit_subproblem(1.0, &m0, &s0);
    let pair = [CMatrix::identity(m0.h_nu.nrows(), m0.h_nu.nrows()), CMatrix::zeros(m0.h_nu.nrows(), m0.h_nu.nrows())];
    let res = t0.residuals(&pair);
    out.push((
        "zero rate floor leaves Tr(H W_m) >= 0",
        res[1].abs() < 1e-15 && res[2].abs() < 1e-15 && t0.constraints[1].rhs == 0.0,
    ));

    let one = random_instance(3);
    let one_el = ChannelSet {
        g_bs_irs: one.channels.g_bs_irs.rows(0, 1).into_owned(),
        h_irs_nu: one.channels.h_irs_nu.rows(0, 1).into_owned(),
        h_irs_fu: one.channels.h_irs_fu.rows(0, 1).into_owned(),
        ..one.channels.clone()
    };
    let v1 = ReflectVector::from_phases([0.4]);
    let m1 = SubproblemMatrices::new(&one_el, &v1, &one.w_u, &one.w_m, &one.scenario).unwrap();
    let rp = optimizer::build_reflect_subproblem(0.5, &m1, &one.scenario);
    let pins = rp.constraints.iter().filter(|c| c.relation == Relation::Equal && c.rhs == 1.0).count();
    out.push(("single element gives a 2x2 lift with unit diagonal", rp.variables[0].dim == 2 && pins == 2));

    let rec =
        optimizer::recover_rank_one(&(linalg::outer(&u, &u) * C64::new(4.0, 0.0)), optimizer::RecoveryKind::Beamformer);
    let mut two_u = &u * C64::new(2.0, 0.0);
    linalg::fix_phase(&mut two_u);
    out.push(("4 u u^H recovers 2 u", (rec.vector - two_u).norm() < 1e-12));
    let known = ReflectVector::from_phases([0.3, 2.0, 5.5]);
    let lifted = known.lifted() * C64::from_polar(1.0, 0.9);
    let rec = optimizer::recover_rank_one(&linalg::outer(&lifted, &lifted), optimizer::RecoveryKind::Reflect);
    out.push(("exact lift recovers the reflect vector", (rec.vector - known.coefficients()).norm() < 1e-12));

    // Oracle and traces.
    let ocfg = tiny_config(5);
    let oset = channels(&ocfg);
    let coarse = OracleSpec { phase_levels: 4, polar_levels: 3, azimuth_levels: 4, power_levels: 6 };
    let a = brute_force_oracle(&ocfg, &oset, &coarse).unwrap().best_rate;
    let b = brute_force_oracle(&ocfg, &oset, &coarse.refined()).unwrap().best_rate;
    out.push(("refining the oracle grid never lowers its value", b >= a));
    let (_, report) = optimizer::dinkelbach_solve(&ocfg, &oset, &DinkelbachConfig::default()).unwrap();
    out.push(("convergence trace is nondecreasing in q", report.q_iterates.windows(2).all(|w| w[1] >= w[0] - 1e-6)));
    out
}

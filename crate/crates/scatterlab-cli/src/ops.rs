//! Operation registry: each built-in pipeline stage runs one experiment,
//! writes its artifacts, and returns named pass/fail checks with the
//! thresholds pinned in code.

use std::collections::BTreeMap;
use std::path::PathBuf;

use scatterlab::birman::{self, ZeroEnergyStatus};
use scatterlab::dispersive::{self, NlsSign};
use scatterlab::freefield::{Branch, WavePacket};
use scatterlab::io::{gnuplot_loglog, write_json, CsvTable};
use scatterlab::numerics::{LineGrid, RadialGrid};
use scatterlab::potentials::{aubin_talenti, kato_norm, Potential};
use scatterlab::restriction;
use scatterlab::waveop;
use scatterlab::wiener;
use scatterlab::{C64, Result, ScatterError};

use crate::runner::CheckResult;

pub struct OpContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub params: serde_json::Value,
}

pub type OpFn = fn(&OpContext) -> Result<Vec<CheckResult>>;

pub fn registry() -> BTreeMap<&'static str, OpFn> {
    let mut m: BTreeMap<&'static str, OpFn> = BTreeMap::new();
    m.insert("free_decay", op_free_decay);
    m.insert("wave_operator_defects", op_wave_operator_defects);
    m.insert("w1_cross_check", op_w1_cross_check);
    m.insert("born_vs_inversion", op_born_vs_inversion);
    m.insert("zero_energy_classification", op_zero_energy);
    m.insert("resonant_decay", op_resonant_decay);
    m.insert("wiener_engine", op_wiener_engine);
    m.insert("kato_norms", op_kato_norms);
    m.insert("stein_tomas", op_stein_tomas);
    m.insert("strichartz_nls", op_strichartz_nls);
    m.insert("algebra_axioms", op_algebra_axioms);
    m
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

// ---------------------------------------------------------------------------

fn op_free_decay(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let grid = RadialGrid::new(480.0, 8192);
    let f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 2.0).exp(), 0.0));
    let times: Vec<f64> = (0..24).map(|i| 5.0 + 45.0 * i as f64 / 23.0).collect();
    let run = dispersive::evolve(&grid, &Potential::zero(), &f, &times, false, (5.0, 50.0))?;

    let mut table = CsvTable::new(&["t", "sup_norm", "l2_norm"]);
    for i in 0..run.times.len() {
        table.push(&[run.times[i], run.sup_norms[i], run.l2_norms[i]]);
    }
    table.write(&ctx.out_dir.join("free_decay.csv"))?;
    write_json(&ctx.out_dir.join("free_decay_fit.json"), &run.fit)?;
    gnuplot_loglog(
        &ctx.out_dir.join("free_decay.gp"),
        "free_decay.csv",
        "free 3D sup-norm decay",
        run.fit.exponent,
        run.fit.prefactor,
    )?;

    Ok(vec![check(
        "free_decay_exponent",
        within(run.fit.exponent, 1.5, 0.05),
        format!("exponent {:.4} (target 1.5 ± 0.05)", run.fit.exponent),
    )])
}

// ---------------------------------------------------------------------------

fn op_wave_operator_defects(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    // Domain sized so boundary reflections stay clear of the potential
    // support through the doubled horizon T = 100.
    let grid = RadialGrid::new(480.0, 8192);
    let v = Potential::gaussian(0.5, 1.0);
    let f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 4.0).exp(), 0.0));
    let l2 = f.norms().l2;
    let schedule = waveop::DEFAULT_EPS_SCHEDULE;
    let s_probes = [0.5, 1.0, 2.0];

    let short = waveop::cook_wave_operator(&grid, &v, &f, 50.0, &schedule, &s_probes)?;
    let long = waveop::cook_wave_operator(&grid, &v, &f, 100.0, &schedule, &s_probes)?;

    let mut table = CsvTable::new(&[
        "horizon",
        "isometry_defect",
        "intertwining_defect",
        "tail_estimate",
    ]);
    for r in [&short, &long] {
        table.push(&[
            r.horizon,
            r.isometry_defect,
            r.intertwining_defect,
            r.tail_estimate,
        ]);
    }
    table.write(&ctx.out_dir.join("wave_operator_defects.csv"))?;
    write_json(&ctx.out_dir.join("wave_operator_short.json"), &short)?;
    write_json(&ctx.out_dir.join("wave_operator_long.json"), &long)?;

    let iso_ratio = long.isometry_defect / short.isometry_defect.max(1e-300);
    let int_ratio = long.intertwining_defect / short.intertwining_defect.max(1e-300);
    Ok(vec![
        check(
            "isometry_defect_at_t50",
            short.isometry_defect <= 1e-2 * l2,
            format!(
                "defect {:.3e} vs 1e-2·‖f‖₂ = {:.3e}",
                short.isometry_defect,
                1e-2 * l2
            ),
        ),
        check(
            "intertwining_defect_at_t50",
            short.intertwining_defect <= 2e-2 * l2,
            format!(
                "defect {:.3e} vs 2e-2·‖f‖₂ = {:.3e}",
                short.intertwining_defect,
                2e-2 * l2
            ),
        ),
        check(
            "isometry_defect_halves",
            (0.35..=0.65).contains(&iso_ratio),
            format!("T-doubling ratio {iso_ratio:.3} (target 0.5 ± 30%)"),
        ),
        check(
            "intertwining_defect_halves",
            (0.35..=0.65).contains(&int_ratio),
            format!("T-doubling ratio {int_ratio:.3} (target 0.5 ± 30%)"),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_w1_cross_check(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let grid = RadialGrid::new(48.0, 768);
    let l_extent = 2.0 * 48.0 + 50.0;

    let cal_v = Potential::gaussian(0.5, 1.0);
    let cal_f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 2.25).exp(), 0.0));
    let reference = waveop::w1_continuum(&cal_v, &cal_f, 0.0)?;
    let l_cal = waveop::structure_l(&cal_v, l_extent, 4801)?;
    let raw = waveop::apply_w1_structure(&l_cal, &cal_f, &grid)?;
    let kappa = waveop::calibrate_kappa(&reference, &raw);
    let cal_mismatch = waveop::relative_l2(
        &raw.with_values(raw.values().iter().map(|z| z * kappa).collect()),
        &reference,
    );

    let pairs: Vec<(Potential, WavePacket)> = vec![
        (
            Potential::gaussian(0.3, 1.2),
            WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 4.0).exp(), 0.0)),
        ),
        (
            Potential::gaussian(0.7, 0.8),
            WavePacket::radial_from_psi(&grid, |r| {
                C64::new((-(r - 1.0) * (r - 1.0) / 3.0).exp(), 0.0)
            }),
        ),
        (
            Potential::gaussian(0.5, 1.5),
            WavePacket::radial_from_psi(&grid, |r| {
                C64::new((-r * r / 2.0).exp(), 0.3 * (-r * r / 5.0).exp())
            }),
        ),
    ];
    let mut table = CsvTable::new(&["pair", "relative_l2_difference"]);
    table.push(&[0.0, cal_mismatch]);
    let mut checks = vec![check(
        "w1_calibration_pair",
        cal_mismatch <= 5e-2,
        format!("relative L² difference {cal_mismatch:.3e} (≤ 5e-2)"),
    )];
    for (i, (v, f)) in pairs.iter().enumerate() {
        let reference_i = waveop::w1_continuum(v, f, 0.0)?;
        let l_i = waveop::structure_l(v, l_extent, 4801)?.with_kappa(kappa);
        let structure_i = waveop::apply_w1_structure(&l_i, f, &grid)?;
        let rel = waveop::relative_l2(&structure_i, &reference_i);
        table.push(&[(i + 1) as f64, rel]);
        checks.push(check(
            &format!("w1_disjoint_pair_{}", i + 1),
            rel <= 5e-2,
            format!("relative L² difference {rel:.3e} (≤ 5e-2)"),
        ));
    }
    table.write(&ctx.out_dir.join("w1_cross_check.csv"))?;
    write_json(
        &ctx.out_dir.join("w1_kappa.json"),
        &serde_json::json!({ "kappa_re": kappa.re, "kappa_im": kappa.im }),
    )?;
    Ok(checks)
}

// ---------------------------------------------------------------------------

fn op_born_vs_inversion(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let grid = RadialGrid::new(40.0, 512);
    let v = Potential::gaussian(0.5, 1.0);
    let mut table = CsvTable::new(&["lambda", "agreement", "convergent"]);
    let mut checks = Vec::new();
    for &lambda in &[0.5, 1.0, 2.0] {
        let born = birman::born_series_resolvent(&grid, &v, lambda, Branch::Plus, 0.0, 16);
        let agreement = born.direct_agreement.unwrap_or(f64::INFINITY);
        table.push(&[lambda, agreement, if born.convergent { 1.0 } else { 0.0 }]);
        checks.push(check(
            &format!("born_agreement_lambda_{lambda}"),
            born.convergent && agreement <= 1e-6,
            format!("agreement {agreement:.3e} (≤ 1e-6), convergent {}", born.convergent),
        ));
    }
    // Divergence for the resonant potential at λ = 0.1.
    let rgrid = RadialGrid::new(60.0, 512);
    let at = aubin_talenti(1.0, &rgrid);
    let born_res = birman::born_series_resolvent(&rgrid, &at.potential, 0.1, Branch::Plus, 0.0, 8);
    checks.push(check(
        "born_divergence_resonant",
        !born_res.convergent,
        format!("term ratios {:?}", born_res.ratios),
    ));
    table.write(&ctx.out_dir.join("born_vs_inversion.csv"))?;
    let mut rt = CsvTable::new(&["term", "norm"]);
    for (i, n) in born_res.term_norms.iter().enumerate() {
        rt.push(&[i as f64, *n]);
    }
    rt.write(&ctx.out_dir.join("born_resonant_terms.csv"))?;
    Ok(checks)
}

// ---------------------------------------------------------------------------

fn op_zero_energy(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let levels = [256usize, 512, 1024, 2048];
    let at = aubin_talenti(1.0, &RadialGrid::new(60.0, 8));
    let resonant = birman::zero_energy_report(&at.potential, 60.0, &levels)?;
    let regular =
        birman::zero_energy_report(&Potential::gaussian(0.5, 1.0), 40.0, &[128, 256, 512, 1024])?;
    write_json(&ctx.out_dir.join("zero_energy_resonant.json"), &resonant)?;
    write_json(&ctx.out_dir.join("zero_energy_regular.json"), &regular)?;
    let mut trace = CsvTable::new(&["n", "sigma_min_resonant"]);
    for (n, s) in resonant.levels.iter().zip(&resonant.sigma_min_trace) {
        trace.push(&[*n as f64, *s]);
    }
    trace.write(&ctx.out_dir.join("sigma_trace.csv"))?;

    let decreasing = resonant
        .sigma_min_trace
        .windows(2)
        .all(|w| w[1] < w[0]);
    Ok(vec![
        check(
            "resonant_flagged",
            resonant.status == ZeroEnergyStatus::Resonant,
            format!("status {:?}, σ slope {:.3}", resonant.status, resonant.sigma_slope),
        ),
        check(
            "null_vector_residual",
            resonant.null_vector_residual.map(|r| r <= 1e-3).unwrap_or(false),
            format!("residual {:?} (≤ 1e-3)", resonant.null_vector_residual),
        ),
        check(
            "sigma_min_decreasing",
            decreasing,
            format!("trace {:?}", resonant.sigma_min_trace),
        ),
        check(
            "unique_negative_eigenvalue",
            resonant.negative_eigenvalues == 1 && resonant.count_stable,
            format!(
                "count {} (stable: {})",
                resonant.negative_eigenvalues, resonant.count_stable
            ),
        ),
        check(
            "regular_gaussian",
            regular.status == ZeroEnergyStatus::Regular,
            format!("status {:?}", regular.status),
        ),
        check(
            "m00_neumann_bound",
            regular.m00 <= 4.0 / 3.0 * 1.1,
            format!("M₀₀ = {:.4} (≤ 4/3 + 10%)", regular.m00),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_resonant_decay(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let grid = RadialGrid::new(480.0, 8192);
    let at = aubin_talenti(1.0, &grid);
    let regular_v = Potential::gaussian(0.5, 1.0);
    // Family spanning a narrow free-like packet and a wide packet aligned
    // with the resonance profile (the slow channel for -5W⁴).
    let family = vec![
        WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 2.0).exp(), 0.0)),
        WavePacket::radial_from_psi(&grid, |r| {
            C64::new((1.0 + r * r / 3.0).powf(-0.5) * (-r * r / 64.0).exp(), 0.0)
        }),
    ];
    let times: Vec<f64> = (0..24).map(|i| 5.0 + 45.0 * i as f64 / 23.0).collect();
    let cmp =
        dispersive::decay_comparison(&grid, &regular_v, &at.potential, &family, &times, (5.0, 50.0))?;

    write_json(&ctx.out_dir.join("decay_comparison.json"), &cmp)?;
    Ok(vec![
        check(
            "regular_exponent",
            within(cmp.regular.exponent, 1.5, 0.15),
            format!("exponent {:.4} (target 1.5 ± 0.15)", cmp.regular.exponent),
        ),
        check(
            "resonant_exponent",
            within(cmp.resonant.exponent, 0.5, 0.15),
            format!("exponent {:.4} (target 0.5 ± 0.15)", cmp.resonant.exponent),
        ),
        check(
            "exponent_gap",
            within(cmp.exponent_gap, 1.0, 0.3),
            format!("gap {:.4} (target 1.0 ± 0.3)", cmp.exponent_gap),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_wiener_engine(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let radial = RadialGrid::new(12.0, 48);
    let h = radial.spacing();
    let line = LineGrid::lattice(800, h);
    let v = Potential::gaussian(0.5, 1.0);
    let t = wiener::build_t_minus(&v, &radial, &line)?;
    let inv = wiener::wiener_invert(&t)?;
    let neumann = wiener::neumann_series(&t, 8)?;
    let neumann_diff = inv.s.sub(&neumann).algebra_norm();

    // Symbol identity against the Birman-Schwinger kernel.
    let mut worst_symbol_err = 0.0_f64;
    for &lam in &[0.0, 0.5, 1.0, 2.0] {
        let sym = t.continuum_symbol(lam);
        let reference = wiener::vr0_reference(&radial, &v, lam);
        let err = scatterlab::linalg::norm_max(&(sym - &reference))
            / scatterlab::linalg::norm_max(&reference);
        worst_symbol_err = worst_symbol_err.max(err);
    }

    // Diagnostics CSVs.
    let diag = wiener::diagnostics(&t, &[0.0, 0.25, 0.5, 1.0, 2.0])?;
    let mut mod_csv = CsvTable::new(&["delta", "modulus", "modulus_squared"]);
    for (a, b) in diag
        .continuity_modulus
        .iter()
        .zip(&diag.continuity_modulus_squared)
    {
        mod_csv.push(&[a.0, a.1, b.1]);
    }
    mod_csv.write(&ctx.out_dir.join("wiener_modulus.csv"))?;
    let mut tail_csv = CsvTable::new(&["R", "tail_mass"]);
    for (r, m) in &diag.tail_mass {
        tail_csv.push(&[*r, *m]);
    }
    tail_csv.write(&ctx.out_dir.join("wiener_tail.csv"))?;
    let mut sig_csv = CsvTable::new(&["lambda", "sigma_min"]);
    for (l, s) in &diag.symbol_sigma_min {
        sig_csv.push(&[*l, *s]);
    }
    sig_csv.write(&ctx.out_dir.join("wiener_sigma.csv"))?;

    // Resonant potential: non-invertible symbol at λ ≈ 0.
    let at = aubin_talenti(1.0, &RadialGrid::new(40.0, 8)).potential;
    let rradial = RadialGrid::new(40.0, 64);
    let rh = rradial.spacing();
    let rline = LineGrid::lattice(2 * 64 + 8, rh);
    let rt = wiener::build_t_minus(&at, &rradial, &rline)?;
    let flagged = matches!(
        wiener::wiener_invert_checked(&rt, &at, &[64, 96, 128], &[0.0, 0.5, 1.0]),
        Err(ScatterError::NonInvertibleSymbol { lambda, .. }) if lambda.abs() < 0.25
    );

    Ok(vec![
        check(
            "wiener_inverse_residual",
            inv.residual_right <= 1e-6 && inv.residual_left <= 1e-6,
            format!(
                "residuals {:.3e} / {:.3e} (≤ 1e-6)",
                inv.residual_right, inv.residual_left
            ),
        ),
        check(
            "neumann_agreement",
            neumann_diff <= 1e-5,
            format!("‖S - Σ(-1)ⁿT^∗ⁿ‖ = {neumann_diff:.3e} (≤ 1e-5)"),
        ),
        check(
            "symbol_matches_birman",
            worst_symbol_err <= 1e-6,
            format!("max symbol mismatch {worst_symbol_err:.3e} (≤ 1e-6)"),
        ),
        check(
            "resonant_symbol_flagged",
            flagged,
            "NonInvertibleSymbol at λ ≈ 0 for -5W⁴".to_string(),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_kato_norms(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let k1 = kato_norm(&Potential::gaussian(1.0, 1.0))?;
    let radial = RadialGrid::new(12.0, 48);
    let h = radial.spacing();
    let line = LineGrid::lattice(2 * 48 + 8, h);
    let v = Potential::gaussian(0.5, 1.0);
    let t = wiener::build_t_minus(&v, &radial, &line)?;
    let norm = t.algebra_norm();
    let bound = kato_norm(&v)?.value / (4.0 * std::f64::consts::PI);

    let mut table = CsvTable::new(&["kato_gaussian", "algebra_norm", "kato_bound"]);
    table.push(&[k1.value, norm, bound]);
    table.write(&ctx.out_dir.join("kato_norms.csv"))?;

    Ok(vec![
        check(
            "kato_norm_value",
            within(k1.value, 2.0 * std::f64::consts::PI, 1e-4),
            format!("‖e^{{-|x|²}}‖_𝒦 = {:.8} (2π ± 1e-4)", k1.value),
        ),
        check(
            "algebra_norm_bound",
            norm <= bound * 1.05,
            format!("‖T⁻‖ = {norm:.5} vs (4π)⁻¹‖V‖_𝒦 = {bound:.5} (within 5%)"),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_stein_tomas(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    // Sphere transform decay.
    let sphere = restriction::SurfaceMeasure::sphere_3d(1.0, 288);
    let xi: Vec<[f64; 3]> = (0..1400)
        .map(|i| [0.0, 0.0, 5.0 + 55.0 * i as f64 / 1399.0])
        .collect();
    let vals = restriction::sigma_hat(&sphere, &xi)?;
    let mut decay_csv = CsvTable::new(&["xi", "abs_sigma_hat"]);
    let mut peaks = Vec::new();
    for i in 1..vals.len() - 1 {
        decay_csv.push(&[xi[i][2], vals[i].norm()]);
        let (a, b, c) = (vals[i - 1].norm(), vals[i].norm(), vals[i + 1].norm());
        if b > a && b > c {
            peaks.push((xi[i][2], b));
        }
    }
    decay_csv.write(&ctx.out_dir.join("sigma_decay.csv"))?;
    let decay_fit = scatterlab::numerics::fit_power_law(&peaks, (5.0, 60.0))?;
    gnuplot_loglog(
        &ctx.out_dir.join("sigma_decay.gp"),
        "sigma_decay.csv",
        "sphere-measure transform decay",
        decay_fit.exponent,
        decay_fit.prefactor,
    )?;

    // Dyadic slopes and implied critical index.
    let pieces = restriction::tomas_dyadic_norms(&[0, 1, 2, 3, 4, 5, 6, 7]);
    let slopes = restriction::tomas_slopes(&pieces)?;
    let mut dyadic_csv = CsvTable::new(&["j", "norm_1_inf", "norm_2_2"]);
    for p in &pieces {
        dyadic_csv.push(&[p.j as f64, p.norm_1_inf, p.norm_2_2]);
    }
    dyadic_csv.write(&ctx.out_dir.join("tomas_dyadic.csv"))?;
    write_json(&ctx.out_dir.join("tomas_slopes.json"), &slopes)?;

    // Knapp example.
    let deltas: Vec<f64> = (0..8)
        .map(|k| 0.25 * 2f64.powf(-(k as f64) * 3.0 / 7.0))
        .collect();
    let knapp = restriction::knapp_ratio(&deltas)?;
    let mut knapp_csv = CsvTable::new(&[
        "delta",
        "ratio",
        "long_extent",
        "trans_extent",
        "peak",
        "long_extent_quarter",
        "trans_extent_quarter",
    ]);
    for r in &knapp.rows {
        knapp_csv.push(&[
            r.delta,
            r.ratio,
            r.long_extent,
            r.trans_extent,
            r.peak,
            r.long_extent_quarter,
            r.trans_extent_quarter,
        ]);
    }
    knapp_csv.write(&ctx.out_dir.join("knapp.csv"))?;
    write_json(&ctx.out_dir.join("knapp_fits.json"), &knapp)?;

    Ok(vec![
        check(
            "sigma_decay_exponent",
            within(decay_fit.exponent, 1.0, 0.05),
            format!("exponent {:.4} (target 1.0 ± 0.05)", decay_fit.exponent),
        ),
        check(
            "dyadic_slope_1_inf",
            within(slopes.slope_1_inf, -1.0, 0.1),
            format!("slope {:.4} (target -1.0 ± 0.1)", slopes.slope_1_inf),
        ),
        check(
            "dyadic_slope_2_2",
            within(slopes.slope_2_2, 1.0, 0.1),
            format!("slope {:.4} (target +1.0 ± 0.1)", slopes.slope_2_2),
        ),
        check(
            "implied_critical_index",
            within(slopes.critical_p, 4.0 / 3.0, 0.05),
            format!("p = {:.4} (target 4/3 ± 0.05)", slopes.critical_p),
        ),
        check(
            "knapp_ratio_balance",
            knapp.ratio_spread <= 2.0,
            format!("ratio spread {:.3} (≤ 2)", knapp.ratio_spread),
        ),
        check(
            "knapp_cylinder_exponents",
            within(knapp.long_exponent, 2.0, 0.2)
                && within(knapp.trans_exponent, 1.0, 0.2)
                && within(knapp.peak_exponent, -2.0, 0.2),
            format!(
                "long {:.3}, transverse {:.3}, peak {:.3} (targets 2/1/-2 ± 0.2)",
                knapp.long_exponent, knapp.trans_exponent, knapp.peak_exponent
            ),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_strichartz_nls(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let grid = LineGrid::new(600.0, 59049);
    let fam = restriction::packet_family(&grid, ctx.seed, 10);
    let fam2 = restriction::packet_family(&grid, ctx.seed, 20);
    let r1 = restriction::strichartz_ratio(&fam, 40.0)?;
    let r2 = restriction::strichartz_ratio(&fam2, 40.0)?;
    let growth = (r2.max_ratio - r1.max_ratio) / r1.max_ratio;

    let mut ratio_csv = CsvTable::new(&["packet", "ratio"]);
    for (i, r) in r2.ratios.iter().enumerate() {
        ratio_csv.push(&[i as f64, *r]);
    }
    ratio_csv.write(&ctx.out_dir.join("strichartz_ratios.csv"))?;

    // Critical scaling invariance.
    let lam: f64 = 2.0;
    let base = WavePacket::line_from_psi(&grid, |x| C64::new((-x * x / 2.0).exp(), 0.0));
    let scaled = WavePacket::line_from_psi(&grid, |x| {
        C64::new(lam.sqrt() * (-(lam * x) * (lam * x) / 2.0).exp(), 0.0)
    });
    let nb = base.norms().l2;
    let ns = scaled.norms().l2;
    let rb = restriction::strichartz_ratio(
        &[base.with_values(base.values().iter().map(|z| z / nb).collect())],
        40.0,
    )?
    .max_ratio;
    let rs = restriction::strichartz_ratio(
        &[scaled.with_values(scaled.values().iter().map(|z| z / ns).collect())],
        40.0,
    )?
    .max_ratio;
    let scale_drift = (rb - rs).abs() / rb;

    // Small-data NLS fixed point.
    let ngrid = LineGrid::new(40.0, 2187);
    let raw: Vec<C64> = ngrid.nodes().map(|x| C64::new((-x * x).exp(), 0.0)).collect();
    let mass = (raw.iter().map(|z| z.norm_sqr()).sum::<f64>() * ngrid.spacing()).sqrt();
    let psi0: Vec<C64> = raw.iter().map(|z| z * (0.05 / mass)).collect();
    let nls = dispersive::nls_small_data(&ngrid, &psi0, NlsSign::Focusing, 3.0)?;
    write_json(&ctx.out_dir.join("nls_run.json"), &nls)?;
    let worst_contraction = nls
        .contraction_factors
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);

    Ok(vec![
        check(
            "strichartz_family_stability",
            growth >= -1e-12 && growth <= 0.10,
            format!(
                "max ratio {:.5} → {:.5} (growth {:.2}%)",
                r1.max_ratio,
                r2.max_ratio,
                100.0 * growth
            ),
        ),
        check(
            "strichartz_scaling_invariance",
            scale_drift <= 1e-3,
            format!("ratio drift {scale_drift:.2e} under critical scaling (≤ 1e-3)"),
        ),
        check(
            "nls_contraction",
            nls.converged && !nls.contraction_factors.is_empty() && worst_contraction <= 0.5,
            format!(
                "{} contraction factors, worst {worst_contraction:.3e} (≤ 0.5)",
                nls.contraction_factors.len()
            ),
        ),
        check(
            "nls_dual_solver_agreement",
            nls.direct_solver_distance <= 1e-4,
            format!(
                "L² distance to the direct solver {:.3e} (≤ 1e-4)",
                nls.direct_solver_distance
            ),
        ),
    ])
}

// ---------------------------------------------------------------------------

fn op_algebra_axioms(ctx: &OpContext) -> Result<Vec<CheckResult>> {
    let radial = RadialGrid::new(6.0, 10);
    let line = LineGrid::new(10.0, 41);
    let mut table =
        CsvTable::new(&["instance", "assoc_defect", "homomorphism_defect", "submult_margin"]);
    let mut all_ok = true;
    let mut worst = (0.0_f64, 0.0_f64);
    for inst in 0..10u64 {
        let base = 3 * (ctx.seed ^ (inst + 1));
        let a = wiener::random_family(&line, &radial, base + 1, 3, 0.8);
        let b = wiener::random_family(&line, &radial, base + 2, 4, 0.6);
        let c = wiener::random_family(&line, &radial, base + 3, 2, 0.9);
        let ab = wiener::convolve(&a, &b)?;
        let ab_c = wiener::convolve(&ab, &c)?;
        let a_bc = wiener::convolve(&a, &wiener::convolve(&b, &c)?)?;
        let assoc = ab_c.sub(&a_bc).algebra_norm() / ab_c.algebra_norm().max(1e-300);
        let mut homo = 0.0_f64;
        for &lamb in &[0.0, 0.4, 1.0] {
            let lhs = ab.symbol(lamb)?;
            let rhs = a.symbol(lamb)? * b.symbol(lamb)?;
            homo = homo.max(
                scatterlab::linalg::norm_max(&(lhs - &rhs))
                    / scatterlab::linalg::norm_max(&rhs).max(1e-300),
            );
        }
        let submult_margin = a.algebra_norm() * b.algebra_norm() - ab.algebra_norm();
        table.push(&[inst as f64, assoc, homo, submult_margin]);
        all_ok &= assoc < 1e-8 && homo < 1e-8 && submult_margin >= -1e-12;
        worst = (worst.0.max(assoc), worst.1.max(homo));
    }
    table.write(&ctx.out_dir.join("algebra_axioms.csv"))?;
    Ok(vec![check(
        "algebra_axioms_random_instances",
        all_ok,
        format!(
            "10 instances: worst associativity {:.2e}, worst homomorphism {:.2e}",
            worst.0, worst.1
        ),
    )])
}

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use wavefield_anc::experiments::train_model;
use wavefield_anc::validate::{
    fixed_point_holds, gradient_check, gram_deviation, plane_wave_residuals, pure_mode_round_trip,
    second_derivative_check, single_tone_reduction,
};
use wavefield_anc::{run_anc_convergence, run_field_map, run_interp_sweep, Bundle, ExperimentConfig};
use wavefield_core::sh::spherical_bessel_j;

struct Outcome {
    lines: Vec<String>,
    failed: usize,
}

impl Outcome {
    fn record(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        let status = if passed { "PASS" } else { "FAIL" };
        let line = format!("{status} criterion {id} {name}: {detail}");
        println!("{line}");
        self.lines.push(line);
        if !passed {
            self.failed += 1;
        }
    }
}

fn csv_files(b: &Bundle) -> BTreeMap<&str, &str> {
    b.files
        .iter()
        .filter(|(k, _)| k.ends_with(".csv"))
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect()
}

fn written_bytes(b: &Bundle) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().expect("temp dir");
    b.write_to(dir.path()).expect("bundle written");
    b.files
        .keys()
        .filter(|k| k.ends_with(".csv"))
        .map(|k| (k.clone(), std::fs::read(dir.path().join(k)).expect("file readable")))
        .collect()
}

fn main() -> ExitCode {
    let mut out = Outcome {
        lines: Vec::new(),
        failed: 0,
    };
    let cfg = ExperimentConfig::headrest(0);
    let scenario = cfg.resolve().expect("headrest scenario is valid");

    let t = Instant::now();
    let model = train_model(&cfg, &scenario).expect("training succeeds");
    let train_secs = t.elapsed().as_secs_f64();

    // 1
    let sweep = run_interp_sweep(&cfg, Some(&model)).expect("sweep runs");
    let all_below = sweep.rows.iter().all(|r| r.eps_pinn_db < r.eps_sh_db);
    let mean_margin = sweep.mean_margin(0.2, 0.4);
    out.record(
        1,
        "interpolation dominance",
        all_below && mean_margin >= 4.0 && sweep.rows.len() == 16 && train_secs <= 600.0,
        format!(
            "pinn below sh at all {} radii: {all_below}, min margin {:.2} dB, mean margin over [0.2, 0.4] {:.2} dB (>= 4), training {:.1} s (<= 600)",
            sweep.rows.len(),
            sweep.min_margin(),
            mean_margin,
            train_secs
        ),
    );

    // 2
    let t = Instant::now();
    let conv = run_anc_convergence(&cfg, Some(&model)).expect("control runs");
    let anc_secs = t.elapsed().as_secs_f64();
    let gap = conv.steady_state_gap();
    out.record(
        2,
        "anc steady-state gap",
        gap >= 8.0 && conv.pinn.iterations() == 10_000 && anc_secs <= 120.0,
        format!(
            "multipoint {:.2} dB, pinn {:.2} dB, gap {:.2} dB (>= 8), both modes {:.1} s (<= 120)",
            conv.multipoint.tail_mean_db(1000),
            conv.pinn.tail_mean_db(1000),
            gap,
            anc_secs
        ),
    );

    // 3
    let field = run_field_map(&cfg, Some(&model)).expect("field map runs");
    let ear_gap = field.ear_db_multipoint - field.ear_db_pinn;
    out.record(
        3,
        "ear-region field map",
        ear_gap >= 5.0,
        format!(
            "ear disks multipoint {:.2} dB, pinn {:.2} dB, gap {:.2} dB (>= 5)",
            field.ear_db_multipoint, field.ear_db_pinn, ear_gap
        ),
    );

    // 4
    let t = Instant::now();
    let g = gradient_check(11, 20);
    let d2 = second_derivative_check(11, 20);
    out.record(
        4,
        "gradient and derivative oracles",
        g < 1e-4 && d2 < 1e-6,
        format!(
            "loss gradient {g:.3e} (< 1e-4), second derivatives {d2:.3e} (< 1e-6), 20 draws each, {:.2} s",
            t.elapsed().as_secs_f64()
        ),
    );

    // 5
    let (fit, fitted, untrained) = plane_wave_residuals(7);
    let ratio = untrained / fitted;
    out.record(
        5,
        "wave-equation residual oracle",
        ratio >= 10.0,
        format!("untrained {untrained:.3e} / fitted {fitted:.3e} = {ratio:.3e} (>= 10), fit loss {fit:.2e}"),
    );

    // 6
    let reduction = single_tone_reduction().expect("single tone run");
    let fixed = fixed_point_holds(5);
    out.record(
        6,
        "fxlms convergence oracle",
        reduction >= 40.0 && fixed,
        format!("reduction after 5000 steps {reduction:.1} dB (>= 40), zero-error fixed point bitwise: {fixed}"),
    );

    // 7
    let gram = gram_deviation(3, 10_000);
    let round_trip = pure_mode_round_trip().expect("fit runs");
    let j1 = spherical_bessel_j(1, 1.0);
    let j1_closed = 1f64.sin() - 1f64.cos();
    let j1_ok = (j1 - 0.3011687).abs() <= 1e-6 && (j1 - j1_closed).abs() <= 1e-12;
    out.record(
        7,
        "spherical harmonic correctness",
        gram <= 1e-3 && round_trip <= 1e-6 && j1_ok,
        format!("gram deviation {gram:.2e} (<= 1e-3), round trip {round_trip:.2e} (<= 1e-6), j1(1) = {j1:.10}"),
    );

    // 8
    let again_sweep = run_interp_sweep(&cfg, None).expect("sweep reruns");
    let again_conv = run_anc_convergence(&cfg, None).expect("control reruns");
    let again_field = run_field_map(&cfg, None).expect("field map reruns");
    let pairs = [
        (&sweep.bundle, &again_sweep.bundle),
        (&conv.bundle, &again_conv.bundle),
        (&field.bundle, &again_field.bundle),
    ];
    let mut compared = 0;
    let mut identical = true;
    for (a, b) in pairs {
        let (fa, fb) = (csv_files(a), csv_files(b));
        compared += fa.len();
        identical &= !fa.is_empty() && fa == fb && written_bytes(a) == written_bytes(b);
    }
    out.record(
        8,
        "determinism",
        identical,
        format!("{compared} csv files from three experiments byte-identical on re-run: {identical}"),
    );

    println!();
    println!("{} of {} criteria passed", out.lines.len() - out.failed, out.lines.len());
    if out.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

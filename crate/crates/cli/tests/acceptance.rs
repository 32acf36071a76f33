//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slopeland::control::{controller_step, invert_planar, position_loop, velocity_loop, ControlMode};
use slopeland::dynamics::{planar_body_accel, state_derivative, step_rk4};
use slopeland::sequencer::{phase_transition, PhaseState};
use slopeland::sim::Plant;
use slopeland::so3::{attitude_error, rotation_exp, rotation_log};
use slopeland::{
    run_scenario, ActuatorCommand, ControllerMemory, GainSet, ManeuverPhase, Outcome, ScenarioConfig, Setpoint, Vec3,
    VehicleParams, VehicleState,
};
use slopeland_cli::{emit_trajectory, run_sweep, Format};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn rk4_scalar2(y: [f64; 2], dt: f64, f: impl Fn([f64; 2]) -> [f64; 2]) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], h: f64| [a[0] + k[0] * h, a[1] + k[1] * h];
    let k1 = f(y);
    let k2 = f(add(y, k1, 0.5 * dt));
    let k3 = f(add(y, k2, 0.5 * dt));
    let k4 = f(add(y, k3, dt));
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn pad_pitch_sweep() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let pitches: Vec<f64> = [10.0f64, 25.0, 40.0, 60.0].iter().map(|d| d.to_radians()).collect();
    let started = Instant::now();
    let report = match run_sweep(&ScenarioConfig::default(), &pitches, Some(dir.path())) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("sweep failed: {e}")),
    };
    let elapsed = started.elapsed().as_secs_f64();
    let mut pass = elapsed < 5.0;
    let mut parts = vec![];
    for row in &report.rows {
        let beta = row.pitch.to_degrees();
        match &row.result {
            Ok(s) => {
                let td = s.touchdown_pitch.map(f64::to_degrees);
                let vn = s.touchdown_normal_speed;
                let ok = s.outcome == Outcome::Landed
                    && td.is_some_and(|p| (p - beta).abs() <= 5.0)
                    && vn.is_some_and(|v| v.abs() < 0.5);
                pass &= ok;
                parts.push(format!(
                    "{beta:.0}deg {} td {:.1}deg vn {:+.2}",
                    s.outcome.label(),
                    td.unwrap_or(f64::NAN),
                    vn.unwrap_or(f64::NAN)
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{beta:.0}deg error {e}"));
            }
        }
    }
    pass &= dir.path().join("sweep.csv").is_file();
    verdict(pass, format!("{}; {elapsed:.2}s", parts.join(", ")))
}

fn fail_safe_abort() -> Verdict {
    let mut cfg = ScenarioConfig::default();
    cfg.pad_offset.y = 0.5;
    let started = Instant::now();
    let (log, s) = match run_scenario(&cfg) {
        Ok(out) => out,
        Err(e) => return verdict(false, e.to_string()),
    };
    let elapsed = started.elapsed().as_secs_f64();
    let last = log.samples.last().expect("non-empty log");
    let miss = (last.state.position - cfg.maneuver.abort_waypoint).norm();
    let pass = s.outcome == Outcome::AbortedRecovered && s.min_altitude > 0.0 && miss < 0.2 && elapsed < 2.0;
    verdict(
        pass,
        format!(
            "{}, min altitude {:.3} m, {:.3} m from waypoint; {elapsed:.2}s",
            s.outcome.label(),
            s.min_altitude,
            miss
        ),
    )
}

fn bond_dominance() -> Verdict {
    let cfg = ScenarioConfig::default();
    let (log, s) = run_scenario(&cfg).expect("nominal run");
    if s.outcome != Outcome::Landed {
        return verdict(false, format!("nominal run ended {}", s.outcome.label()));
    }
    let bonded = log.samples.last().expect("non-empty log").state;
    let mut plant = Plant::Bonded(bonded);
    let mut phase = PhaseState::enter(ManeuverPhase::Bonded, s.final_time);
    let steps = (10.0 / cfg.dt).round() as usize;
    for k in 0..steps {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let cmd = ActuatorCommand {
            collective: 1.0,
            pitch_cyclic: sign,
            roll_cyclic: -sign,
            rudder: sign,
        };
        plant = plant.step(&cmd, cfg.dt, &cfg.vehicle).expect("valid step");
        phase = phase_transition(
            phase,
            plant.state(),
            &cfg.physical_pad(),
            &cfg.maneuver,
            s.final_time + k as f64 * cfg.dt,
        );
    }
    let pass = *plant.state() == bonded && phase.phase == ManeuverPhase::Bonded;
    verdict(
        pass,
        format!(
            "{steps} steps of full deflection, state unchanged: {}",
            *plant.state() == bonded
        ),
    )
}

fn exact_inversion() -> Verdict {
    let p = VehicleParams::default();
    let g = GainSet::default();
    let thrust = p.weight();
    let (dt, u_cmd) = (0.005, 1.0);
    // (u, i_u); the controller is re-evaluated at every RK4 stage
    let f = |y: [f64; 2]| {
        let (pitch, _) = invert_planar((y[0], 0.0), (u_cmd, 0.0), (y[1], 0.0), thrust, &p, &g).expect("thrust ok");
        assert!(pitch.abs() < g.tilt_max, "clamp would engage");
        let (du, _) = planar_body_accel(y[0], 0.0, thrust, pitch, 0.0, &p);
        [du, g.k_iu * (u_cmd - y[0])]
    };
    // lambda_u = 2, k_iu = 0.5: critically damped at s = -1, u(0) = 0, u'(0) = 2
    let reference = |t: f64| 1.0 - (1.0 - t) * (-t).exp();
    let mut y = [0.0, 0.0];
    let mut worst: f64 = 0.0;
    for k in 1..=(5.0 / dt) as usize {
        y = rk4_scalar2(y, dt, f);
        worst = worst.max((y[0] - reference(k as f64 * dt)).abs());
    }
    let gains_as_assumed = g.lambda_u == 2.0 && g.k_iu == 0.5;
    verdict(
        gains_as_assumed && worst < 1e-6,
        format!("max |u - u_ref| = {worst:.2e} m/s over 5 s"),
    )
}

fn hover_equilibrium() -> Verdict {
    let p = VehicleParams::default();
    let g = GainSet::default();
    let s = VehicleState::at_rest(Vec3::new(0.0, 0.0, -1.5));
    let sp = Setpoint::position(s.position, 0.0);
    let mem = ControllerMemory::reset(&p);
    let (cmd, next) = controller_step(&s, &sp, ControlMode::POSITION, &mem, &p, &g, 0.005).expect("hover step");
    let hover = p.gravity * p.mass / p.k_coll;
    let d = state_derivative(&s, &cmd, &p);
    let deriv = [
        d.position.amax(),
        d.velocity.amax(),
        d.attitude.amax(),
        d.body_rates.amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let others = cmd.pitch_cyclic.abs().max(cmd.roll_cyclic.abs()).max(cmd.rudder.abs());
    let integrators = next.i_u.abs().max(next.i_v.abs()).max(next.i_vz.abs());
    let pass = (cmd.collective - hover).abs() <= 1e-12
        && (cmd.collective - 0.5101).abs() < 1e-4
        && others <= 1e-12
        && integrators <= 1e-12
        && deriv <= 1e-12;
    verdict(
        pass,
        format!(
            "collective {:.6}, other outputs {others:.1e}, derivative {deriv:.1e}",
            cmd.collective
        ),
    )
}

fn so3_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut round_trip: f64 = 0.0;
    for _ in 0..10_000 {
        let v = random_unit(&mut rng) * rng.gen_range(0.0..3.0);
        let back = rotation_log(&rotation_exp(&v)).expect("angle below pi");
        round_trip = round_trip.max((back - v).amax());
    }

    let mut same: f64 = 0.0;
    let mut distinct_ok = true;
    for _ in 0..1_000 {
        let r = rotation_exp(&(random_unit(&mut rng) * rng.gen_range(0.0..3.0)));
        same = same.max(attitude_error(&r, &r).expect("identity error").amax());
        let delta = random_unit(&mut rng) * 10f64.powf(rng.gen_range(-6.0..0.4));
        let other = r.compose(&rotation_exp(&delta));
        let e = attitude_error(&other, &r).expect("small error");
        distinct_ok &= e.norm() > 0.5 * delta.norm();
    }

    let p = VehicleParams::default();
    let mut s = VehicleState::at_rest(Vec3::new(0.0, 0.0, -100.0));
    let mut drift: f64 = 0.0;
    for _ in 0..100_000 {
        let cmd = ActuatorCommand {
            collective: rng.gen_range(0.0..1.0),
            pitch_cyclic: rng.gen_range(-1.0..1.0),
            roll_cyclic: rng.gen_range(-1.0..1.0),
            rudder: rng.gen_range(-1.0..1.0),
        };
        s = step_rk4(&s, &cmd, 0.005, &p).expect("valid step");
        drift = drift.max(s.attitude.orthonormality_error());
    }
    let pass = round_trip < 1e-9 && same <= 1e-12 && distinct_ok && drift < 1e-6;
    verdict(
        pass,
        format!("round trip {round_trip:.1e}, error at equality {same:.1e}, orthonormality over 1e5 steps {drift:.1e}"),
    )
}

fn saturation_and_integrators() -> Verdict {
    let g = GainSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut peak: f64 = 0.0;
    for _ in 0..100_000 {
        let s = VehicleState::at_rest(Vec3::new(
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..0.0),
        ));
        let sp = Setpoint::position(
            Vec3::new(
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..0.0),
            ),
            0.0,
        );
        let (vx, vy, vz) = position_loop(&s, &sp, &g);
        peak = peak.max(vx.abs()).max(vy.abs()).max(vz.abs());
    }

    // sampled velocity loop against the planar plant plus a constant push
    let p = VehicleParams::default();
    let (dt, u_cmd, push) = (0.005, 1.0, 0.3);
    let thrust = p.weight();
    let mut mem = ControllerMemory::reset(&p);
    let mut u = 0.0;
    for _ in 0..(20.0 / dt) as usize {
        let (pitch, _, next) = velocity_loop((u, 0.0), (u_cmd, 0.0), &mem, thrust, &p, &g, dt).expect("loop");
        mem = next;
        let f = |y: [f64; 2]| [planar_body_accel(y[0], 0.0, thrust, pitch, 0.0, &p).0 + push, 0.0];
        u = rk4_scalar2([u, 0.0], dt, f)[0];
    }
    let err = (u - u_cmd).abs();
    let pass = peak <= g.v_max && err < 1e-3;
    verdict(
        pass,
        format!(
            "peak |v_cmd| {peak:.4} <= {:.2} m/s; error after 20 s with 0.3 m/s^2 push {err:.1e}",
            g.v_max
        ),
    )
}

fn mode_switch_latch() -> Verdict {
    let cfg = ScenarioConfig::default();
    let pad = cfg.physical_pad();
    let x_switch = cfg.maneuver.switch_x(&cfg.pad);
    let dt = cfg.dt;
    // starts short of x_switch, then swings back and forth across it at 3 Hz
    let x_at = |t: f64| x_switch - 0.3 * (6.0 * std::f64::consts::PI * t).cos() * (1.0 + t);
    let mut phase = PhaseState::enter(ManeuverPhase::Approach, 0.0);
    let mut first_past = None;
    let mut entry = None;
    let mut reverted = false;
    let mut crossings = 0;
    let mut prev_side = false;
    for k in 0..(cfg.maneuver.t_abort * 0.9 / dt) as usize {
        let t = k as f64 * dt;
        let s = VehicleState::at_rest(Vec3::new(x_at(t), 0.0, -2.5));
        let side = s.position.x > x_switch;
        if side != prev_side {
            crossings += 1;
            prev_side = side;
        }
        if side && first_past.is_none() {
            first_past = Some(k);
        }
        let next = phase_transition(phase, &s, &pad, &cfg.maneuver, t);
        if next.phase == ManeuverPhase::Flare && entry.is_none() {
            entry = Some(k);
        }
        reverted |= entry.is_some() && next.phase != ManeuverPhase::Flare;
        phase = next;
    }
    let pass = match (first_past, entry) {
        (Some(a), Some(b)) => a.abs_diff(b) <= 1 && !reverted && crossings >= 3,
        _ => false,
    };
    verdict(
        pass,
        format!("first sample past x_switch {first_past:?}, flare entry {entry:?}, {crossings} crossings, reverted: {reverted}"),
    )
}

fn reproducibility() -> Verdict {
    let cfg = ScenarioConfig::default();
    let emit = |f| {
        let (log, _) = run_scenario(&cfg).expect("run");
        emit_trajectory(&log, f).expect("emit")
    };
    let (a, b) = (emit(Format::Csv), emit(Format::Csv));
    let (ja, jb) = (emit(Format::Json), emit(Format::Json));
    verdict(
        a == b && ja == jb,
        format!(
            "CSV {} bytes identical: {}, JSON identical: {}",
            a.len(),
            a == b,
            ja == jb
        ),
    )
}

fn rk4_order() -> Verdict {
    let p = VehicleParams::default();
    // a steady yaw spin with small cyclic inputs makes the tilt cone around
    let cmd = ActuatorCommand {
        collective: 0.55,
        pitch_cyclic: 0.04,
        roll_cyclic: -0.03,
        rudder: 0.5,
    };
    let flatten = |s: &VehicleState| {
        let mut v: Vec<f64> = s.position.iter().chain(s.velocity.iter()).copied().collect();
        v.extend(s.attitude.matrix().iter());
        v.extend(s.body_rates.iter());
        v
    };
    let solve = |dt: f64| {
        let mut s = VehicleState::at_rest(Vec3::new(0.0, 0.0, -10.0));
        s.body_rates = Vec3::new(0.2, -0.1, 0.0);
        for _ in 0..(2.0 / dt).round() as usize {
            s = step_rk4(&s, &cmd, dt, &p).expect("valid step");
        }
        flatten(&s)
    };
    let (a, b, c) = (solve(0.01), solve(0.005), solve(0.0025));
    let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let order = (dist(&a, &b) / dist(&b, &c)).log2();
    verdict(order >= 3.8, format!("observed order {order:.3}"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("pad-pitch sweep lands 10/25/40/60 deg", pad_pitch_sweep),
        ("displaced pad aborts and recovers", fail_safe_abort),
        ("bond dominates full actuator commands", bond_dominance),
        ("exact inversion tracks the reference response", exact_inversion),
        ("hover is an exact equilibrium", hover_equilibrium),
        ("SO(3) maps and orthonormality", so3_properties),
        ("velocity saturation and integral action", saturation_and_integrators),
        ("x_switch latch", mode_switch_latch),
        ("byte-identical reruns", reproducibility),
        ("RK4 convergence order", rk4_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

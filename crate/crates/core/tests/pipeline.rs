use dynquant::config::ExperimentConfig;
use dynquant::numerics::Vector;
use dynquant::quantizer::{decode, EncodedPacket, QuantizerState};
use dynquant::schemes::{min_feasible_levels, SchemeKind};
use dynquant::signals::{DisturbanceSignal, SignalSpec, Table};
use dynquant::sim::{check_invariants, run_closed_loop, RunOptions};
use dynquant::trace::{csv_string, write_packets};
use dynquant::Error;

fn short(scheme: SchemeKind, seed: u64) -> RunOptions {
    RunOptions::new(scheme, 3.0, 1e-3, seed)
}

#[test]
fn reference_config_round_trips_through_emit() {
    let cfg = ExperimentConfig::reference();
    let again = ExperimentConfig::parse(&cfg.emit()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.emit(), cfg.emit());
}

#[test]
fn matched_initial_state_without_disturbance_gives_zero_local_error() {
    let mut cfg = ExperimentConfig::reference();
    cfg.experiment.x0 = cfg.experiment.bounds.x_c.clone();
    for scheme in SchemeKind::ALL {
        let trace =
            run_closed_loop(&cfg.experiment, &SignalSpec::quiet(), &short(scheme, 0)).unwrap();
        assert!(trace.samples.iter().all(|s| s.ehat_norm == 0.0));
        assert!(check_invariants(&trace).ok());
    }
}

#[test]
fn noiseless_run_with_zero_bounds_drives_errors_to_zero() {
    let mut cfg = ExperimentConfig::reference();
    let exp = &mut cfg.experiment;
    exp.x0 = exp.bounds.x_c.clone();
    exp.bounds.u_b = 0.0;
    exp.bounds.d_b = 0.0;
    for scheme in SchemeKind::ALL {
        let opts = RunOptions::new(scheme, 10.0, 1e-3, 0);
        let trace = run_closed_loop(exp, &SignalSpec::quiet(), &opts).unwrap();
        assert!(trace.samples.iter().all(|s| s.ehat_norm == 0.0));
        let rep = check_invariants(&trace);
        assert!(
            rep.local_error.ok() && rep.quantization_error.ok(),
            "{rep:?}"
        );
        assert!(rep.reconstruction_error.ok(), "{rep:?}");
        let eq: Vec<f64> = trace.transmissions[1..]
            .iter()
            .map(|t| t.eq.inf_norm())
            .collect();
        let head = eq[..10].iter().copied().fold(0.0, f64::max);
        let tail = eq[90..].iter().copied().fold(0.0, f64::max);
        assert!(tail < 1e-2 * head, "{scheme}: {head} -> {tail}");
        assert!(
            trace.samples.last().unwrap().er_norm < 1e-2 * head,
            "{scheme}"
        );
    }
}

/// The region is a terminal reachable set: it must hold `x̂` at each
/// encoding instant, but with no inflation the flow can leave it inside
/// the interval.
#[test]
fn zero_inflation_region_holds_at_transmissions_only() {
    let mut cfg = ExperimentConfig::reference();
    let exp = &mut cfg.experiment;
    exp.x0 = exp.bounds.x_c.clone();
    exp.bounds.u_b = 0.0;
    exp.bounds.d_b = 0.0;
    let opts = RunOptions::new(SchemeKind::SetBased, 10.0, 1e-3, 0);
    let trace = run_closed_loop(exp, &SignalSpec::quiet(), &opts).unwrap();
    for pair in trace.transmissions.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let at_tk = trace
            .samples
            .iter()
            .find(|s| s.tx && s.k == next.k)
            .unwrap();
        for i in 0..2 {
            assert!((at_tk.xhat[i] - next.center[i]).abs() <= next.range[i] + 1e-12);
        }
        assert!(prev.k + 1 == next.k);
    }
    assert!(check_invariants(&trace).containment.count > 0);
}

#[test]
fn different_seeds_give_different_traces() {
    let cfg = ExperimentConfig::reference();
    let a = run_closed_loop(
        &cfg.experiment,
        &cfg.signals,
        &short(SchemeKind::SetBased, 1),
    )
    .unwrap();
    let b = run_closed_loop(
        &cfg.experiment,
        &cfg.signals,
        &short(SchemeKind::SetBased, 2),
    )
    .unwrap();
    let c = run_closed_loop(
        &cfg.experiment,
        &cfg.signals,
        &short(SchemeKind::SetBased, 1),
    )
    .unwrap();
    assert_ne!(csv_string(&a).unwrap(), csv_string(&b).unwrap());
    assert_eq!(csv_string(&a).unwrap(), csv_string(&c).unwrap());
}

#[test]
fn packet_stream_decodes_to_recorded_estimates() {
    let cfg = ExperimentConfig::reference();
    let trace = run_closed_loop(
        &cfg.experiment,
        &cfg.signals,
        &short(SchemeKind::NormBased, 4),
    )
    .unwrap();
    let mut bytes = Vec::new();
    write_packets(&trace, &mut bytes).unwrap();
    let mut cursor = bytes.as_slice();
    let levels = cfg.experiment.quantizer.levels();
    for tx in trace.transmissions.iter().skip(1) {
        let p = EncodedPacket::read_wire(&mut cursor, 2).unwrap();
        assert_eq!(p.k, tx.k);
        let qs = QuantizerState::new(tx.center.clone(), tx.range.clone(), tx.k).unwrap();
        assert_eq!(decode(&p, &qs, levels).unwrap().value, tx.decoded);
    }
    assert!(cursor.is_empty());
}

#[test]
fn table_disturbance_at_the_bound_keeps_invariants() {
    let cfg = ExperimentConfig::reference();
    let d_b = cfg.experiment.bounds.d_b;
    let times: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
    let values = (0..30)
        .map(|i| Vector::from([if i % 2 == 0 { d_b } else { -d_b }]))
        .collect();
    let signals = SignalSpec {
        input: cfg.signals.input.clone(),
        disturbance: DisturbanceSignal::Table(Table::new(times, values).unwrap()),
    };
    for scheme in SchemeKind::ALL {
        let trace = run_closed_loop(&cfg.experiment, &signals, &short(scheme, 0)).unwrap();
        assert!(check_invariants(&trace).ok());
    }
}

#[test]
fn disturbance_above_its_bound_is_rejected() {
    let cfg = ExperimentConfig::reference();
    let signals = SignalSpec {
        input: cfg.signals.input.clone(),
        disturbance: DisturbanceSignal::Uniform {
            bound: 10.0 * cfg.experiment.bounds.d_b,
            hold: None,
        },
    };
    let err = run_closed_loop(&cfg.experiment, &signals, &short(SchemeKind::SetBased, 1));
    assert!(matches!(err, Err(Error::SignalBound { .. })));
}

#[test]
fn set_scheme_needs_fewer_levels_at_long_periods() {
    let cfg = ExperimentConfig::reference();
    let a = &cfg.experiment.plant.a;
    let set = min_feasible_levels(SchemeKind::SetBased, a, 0.6, 1024).unwrap();
    let norm = min_feasible_levels(SchemeKind::NormBased, a, 0.6, 1024).unwrap();
    assert!(set.unwrap() < norm.unwrap());
}

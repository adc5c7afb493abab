//! End-to-end runs of the three clearing schemes over seeded arrival
//! streams, checking determinism, accounting, and the relative ordering
//! of the group schemes against immediate matching.

use market_core::{
    Bid, FormationParams, Money, Offer, PriceCurve, ProviderId, Rat, SimulationParams, Slot,
    UserId, Window,
};
use simulator::{build_stream, run_scheme, SchemeKind, SimSetup};

/// Two providers with three instance types and deep volume discounts,
/// the second cheaper at high volume, the first cheaper at low volume.
fn two_providers(horizon: Slot) -> Vec<Offer> {
    let supply = 20;
    let mut offers = Vec::new();
    let mut curves1 = Vec::new();
    let mut curves2 = Vec::new();
    for k in 1..=3i64 {
        curves1.push(
            PriceCurve::from_steps(&[(Money(5 * k), 1), (Money(3 * k), 20)], supply).unwrap(),
        );
        curves2.push(
            PriceCurve::from_steps(&[(Money(6 * k), 1), (Money(4 * k), 16)], supply).unwrap(),
        );
    }
    offers.push(Offer {
        provider: ProviderId(1),
        supply: vec![supply; 3],
        window: Window::new(0, horizon),
        curves: curves1,
    });
    offers.push(Offer {
        provider: ProviderId(2),
        supply: vec![supply; 3],
        window: Window::new(0, horizon),
        curves: curves2,
    });
    offers
}

fn setup(horizon: Slot) -> SimSetup {
    SimSetup {
        types: 3,
        offers: two_providers(horizon),
        kappa: Rat::new(1, 2),
        delay_cost: Money(1),
        migration_cost: Money(10),
        horizon,
        formation: FormationParams::default(),
        placement_seed: 7,
    }
}

fn params(horizon: Slot) -> SimulationParams {
    SimulationParams {
        horizon,
        ..SimulationParams::default()
    }
}

#[test]
fn the_same_seed_reproduces_a_run_exactly() {
    let setup = setup(12);
    let stream = build_stream(&params(12), 3, 11);
    for scheme in [
        SchemeKind::Fcfs,
        SchemeKind::SingleGroup,
        SchemeKind::FormedGroups,
    ] {
        let a = run_scheme(&setup, scheme, &stream);
        let b = run_scheme(&setup, scheme, &stream);
        assert_eq!(a.metrics, b.metrics, "{} metrics drifted", scheme.label());
        assert_eq!(a.events_csv(), b.events_csv(), "{} events drifted", scheme.label());
    }
}

#[test]
fn an_empty_stream_resolves_nothing() {
    let setup = setup(10);
    let stream: Vec<Vec<Bid>> = vec![Vec::new(); 10];
    for scheme in [
        SchemeKind::Fcfs,
        SchemeKind::SingleGroup,
        SchemeKind::FormedGroups,
    ] {
        let run = run_scheme(&setup, scheme, &stream);
        assert_eq!(run.metrics.arrived, 0);
        assert_eq!(run.metrics.winners, 0);
        assert_eq!(run.metrics.losers, 0);
        assert_eq!(run.metrics.unresolved, 0);
        assert_eq!(run.metrics.total_payments, Money::ZERO);
        assert_eq!(run.metrics.utilization(), 0.0);
    }
}

#[test]
fn a_lone_feasible_user_is_served_identically_by_all_schemes() {
    let setup = setup(8);
    let bid = Bid {
        user: UserId(1),
        demand: vec![2, 0, 0],
        length: 2,
        window: Window::new(2, 6),
        valuation: Money(500),
        arrival: 1,
    };
    let mut stream: Vec<Vec<Bid>> = vec![Vec::new(); 8];
    stream[0].push(bid);

    let runs: Vec<_> = [
        SchemeKind::Fcfs,
        SchemeKind::SingleGroup,
        SchemeKind::FormedGroups,
    ]
    .into_iter()
    .map(|scheme| run_scheme(&setup, scheme, &stream))
    .collect();

    for run in &runs {
        assert_eq!(run.metrics.winners, 1, "{}", run.scheme.label());
        assert_eq!(run.metrics.losers, 0);
        assert_eq!(run.metrics.unresolved, 0);
        // two slots of two small instances at 5 cents each
        assert_eq!(run.metrics.allocated_per_type, vec![4, 0, 0]);
        assert_eq!(run.metrics.executed_welfare, Money(500 - 20));
    }
    // a group of one prices the same under every scheme
    assert_eq!(runs[0].metrics.total_payments, runs[1].metrics.total_payments);
    assert_eq!(runs[1].metrics.total_payments, runs[2].metrics.total_payments);
    assert_eq!(runs[0].metrics.provider_revenue, runs[2].metrics.provider_revenue);
}

#[test]
fn every_arrival_resolves_exactly_once_across_schemes() {
    for seed in [3u64, 17, 29] {
        let setup = setup(12);
        let stream = build_stream(&params(12), 3, seed);
        let arrived: usize = stream.iter().map(Vec::len).sum();
        for scheme in [
            SchemeKind::Fcfs,
            SchemeKind::SingleGroup,
            SchemeKind::FormedGroups,
        ] {
            let run = run_scheme(&setup, scheme, &stream);
            assert_eq!(run.metrics.arrived, arrived);
            assert_eq!(
                run.metrics.winners + run.metrics.losers + run.metrics.unresolved,
                arrived
            );
            assert!(run.metrics.utilization() <= 1.0 + 1e-12);
            assert!(run.metrics.total_payments >= Money::ZERO);
            assert!(run.events_csv().starts_with("slot,event,payload\n"));
        }
    }
}

#[test]
fn group_schemes_dominate_immediate_matching_on_seeded_draws() {
    let horizon = 24;
    let setup = setup(horizon);
    let mut accept = [0.0f64; 3];
    let mut util = [0.0f64; 3];
    let mut pay = [0.0f64; 3];
    for seed in 0..20u64 {
        let stream = build_stream(&params(horizon), 3, seed);
        let runs = [
            run_scheme(&setup, SchemeKind::Fcfs, &stream),
            run_scheme(&setup, SchemeKind::SingleGroup, &stream),
            run_scheme(&setup, SchemeKind::FormedGroups, &stream),
        ];
        println!(
            "seed {seed}: accept ia={:.3} bct={:.3} gf={:.3}  util ia={:.3} bct={:.3} gf={:.3}  pay ia={:.1} bct={:.1} gf={:.1}",
            runs[0].metrics.acceptance_rate(),
            runs[1].metrics.acceptance_rate(),
            runs[2].metrics.acceptance_rate(),
            runs[0].metrics.utilization(),
            runs[1].metrics.utilization(),
            runs[2].metrics.utilization(),
            runs[0].metrics.avg_payment_cents(),
            runs[1].metrics.avg_payment_cents(),
            runs[2].metrics.avg_payment_cents(),
        );
        for (i, run) in runs.iter().enumerate() {
            accept[i] += run.metrics.acceptance_rate() / 20.0;
            util[i] += run.metrics.utilization() / 20.0;
            pay[i] += run.metrics.avg_payment_cents() / 20.0;
        }
    }
    println!(
        "means: accept ia={:.3} bct={:.3} gf={:.3}  util ia={:.3} bct={:.3} gf={:.3}  pay ia={:.1} gf={:.1}",
        accept[0], accept[1], accept[2], util[0], util[1], util[2], pay[0], pay[2],
    );
    println!(
        "formed groups vs immediate: accept {:+.1}%  util {:+.1}%  pay {:+.1}%",
        100.0 * (accept[2] / accept[0] - 1.0),
        100.0 * (util[2] / util[0] - 1.0),
        100.0 * (pay[2] / pay[0] - 1.0),
    );
    // a group auction may not do worse than immediate matching on average,
    // and formed groups may not do worse than the market-wide group
    assert!(accept[1] >= accept[0], "single group accepts less than fcfs");
    assert!(accept[2] >= accept[1], "formed groups accept less than the single group");
    assert!(util[1] >= util[0], "single group utilizes less than fcfs");
    assert!(util[2] >= util[0], "formed groups utilize less than fcfs");
    assert!(pay[2] <= pay[0], "formed groups cost users more than fcfs");
    // the single group's market-wide clears pack deeper discount tiers than
    // partitioned groups can reach, so its utilization is allowed to lead
    println!(
        "formed groups vs single group utilization: {:+.4} ({:+.1}%)",
        util[2] - util[1],
        (util[2] / util[1] - 1.0) * 100.0
    );
}

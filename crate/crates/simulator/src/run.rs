//! One simulated run of a clearing scheme over an arrival stream.
//!
//! Slot cycle: execute allocations whose bid-closing time has come, then
//! resolve deadline losers, then admit the slot's arrivals, then recompute
//! (scheme-dependent). An execution closes its auction: members left out of
//! the executed allocation lose at that moment. Service may extend beyond
//! the horizon; utilization only counts instance-slots inside it.

use crate::metrics::SchemeMetrics;
use allocation::{
    bid_map, check_constraints, find_instance_allocation, offer_map, social_welfare, Allocation,
};
use coalition::{find_group_structure, DecisionRecord, EvalContext, GroupStructure};
use market_core::{
    Bid, FormationParams, Market, Money, Offer, ProviderId, Rat, Slot, SupplySchedule, UserId,
};
use pricing::{price_allocation, settle, verify_settlement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// The three clearing disciplines under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Arrival order, singleton placement on the cheapest feasible
    /// provider, executed immediately.
    Fcfs,
    /// Every waiting participant in one market-wide group, recomputed on
    /// arrivals, executed at the group's bid-closing time.
    SingleGroup,
    /// Self-organizing groups; each group executes at its own
    /// bid-closing time.
    FormedGroups,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Fcfs => "fcfs",
            SchemeKind::SingleGroup => "single-group",
            SchemeKind::FormedGroups => "formed-groups",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Executed,
    Winner,
    Loser,
    Migration,
    Settlement,
}

impl EventKind {
    fn label(&self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Executed => "allocation_executed",
            EventKind::Winner => "winner",
            EventKind::Loser => "loser",
            EventKind::Migration => "migration",
            EventKind::Settlement => "settlement",
        }
    }
}

/// One line of the run's event log.
#[derive(Debug, Clone)]
pub struct Event {
    pub slot: Slot,
    pub kind: EventKind,
    pub detail: String,
}

/// Shared configuration of a run, identical across compared schemes.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub types: usize,
    pub offers: Vec<Offer>,
    pub kappa: Rat,
    pub delay_cost: Money,
    pub migration_cost: Money,
    pub horizon: Slot,
    pub formation: FormationParams,
    /// Seeds the random assignment of arrivals to groups under the
    /// formed-groups scheme; the other schemes ignore it.
    pub placement_seed: u64,
}

#[derive(Debug)]
pub struct SimulationRun {
    pub scheme: SchemeKind,
    pub metrics: SchemeMetrics,
    pub events: Vec<Event>,
    /// Cumulative executed welfare after each execution, in slot order.
    pub welfare_trace: Vec<(Slot, Money)>,
}

impl SimulationRun {
    /// Event log as comma-separated records: slot,event,payload.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("slot,event,payload\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", e.slot, e.kind.label(), e.detail));
        }
        out
    }
}

struct Live<'a> {
    setup: &'a SimSetup,
    pool: BTreeMap<UserId, Bid>,
    supply: SupplySchedule,
    metrics: SchemeMetrics,
    events: Vec<Event>,
    welfare_trace: Vec<(Slot, Money)>,
}

impl<'a> Live<'a> {
    fn new(setup: &'a SimSetup) -> Live<'a> {
        let mut metrics = SchemeMetrics::new(setup.types);
        for offer in &setup.offers {
            let span = offer.window.end.min(setup.horizon).saturating_sub(offer.window.start);
            for k in 0..setup.types {
                metrics.supplied_per_type[k] += u64::from(offer.supply[k]) * u64::from(span);
            }
        }
        Live {
            setup,
            pool: BTreeMap::new(),
            supply: SupplySchedule::new(),
            metrics,
            events: Vec::new(),
            welfare_trace: Vec::new(),
        }
    }

    fn event(&mut self, slot: Slot, kind: EventKind, detail: String) {
        self.events.push(Event { slot, kind, detail });
    }

    /// Settle and book one due allocation; winners leave the pool.
    fn execute(&mut self, slot: Slot, alloc: &Allocation) {
        let bids: Vec<&Bid> = alloc
            .winners()
            .map(|u| self.pool.get(&u).expect("executed user is unresolved"))
            .collect();
        let offers: Vec<&Offer> = self.setup.offers.iter().collect();
        let bm = bid_map(bids.iter().copied());
        let om = offer_map(offers.iter().copied());

        let floor = slot.saturating_sub(1);
        let violations = check_constraints(self.setup.types, &bm, &om, &self.supply, floor, alloc);
        assert!(violations.is_empty(), "executed allocation broke feasibility: {violations:?}");

        let sheet = price_allocation(self.setup.types, &bm, &om, alloc, self.setup.kappa);
        let settlement = settle(&sheet, &bm, alloc);
        let problems = verify_settlement(&settlement, &bm);
        assert!(problems.is_empty(), "settlement failed verification: {problems:?}");

        self.metrics.executed_welfare += social_welfare(self.setup.types, &bm, &om, alloc);
        self.welfare_trace.push((slot, self.metrics.executed_welfare));
        let users: Vec<UserId> = alloc.winners().collect();
        self.event(
            slot,
            EventKind::Executed,
            format!(
                "users={};welfare={}",
                users.iter().map(|u| u.to_string()).collect::<Vec<_>>().join("+"),
                social_welfare(self.setup.types, &bm, &om, alloc)
            ),
        );

        for (user, slots) in alloc.iter() {
            let demand = self.pool[&user].demand.clone();
            for (&s, &p) in slots {
                self.supply.consume(p, s, &demand);
                if s <= self.setup.horizon {
                    for k in 0..self.setup.types {
                        self.metrics.allocated_per_type[k] += u64::from(demand[k]);
                    }
                }
            }
            let paid = settlement.user_payments.get(&user).copied().unwrap_or(Money::ZERO);
            self.metrics.total_payments += paid;
            self.metrics.winners += 1;
            self.event(slot, EventKind::Winner, format!("{user};paid={paid}"));
            self.event(slot, EventKind::Settlement, format!("{user};paid={paid}"));
            self.pool.remove(&user);
        }
        for (provider, revenue) in &settlement.provider_revenue {
            *self
                .metrics
                .provider_revenue
                .entry(*provider)
                .or_insert(Money::ZERO) += *revenue;
        }
    }

    /// Remove users whose deadline has passed with nothing executed.
    fn declare_losers(&mut self, slot: Slot) -> Vec<UserId> {
        let lost: Vec<UserId> = self
            .pool
            .iter()
            .filter(|(_, bid)| slot > bid.deadline())
            .map(|(&u, _)| u)
            .collect();
        for user in &lost {
            self.pool.remove(user);
            self.metrics.losers += 1;
            self.event(slot, EventKind::Loser, format!("{user};cause=deadline"));
        }
        lost
    }

    /// Mark one member of a closed auction as shut out.
    fn shut_out(&mut self, slot: Slot, user: UserId) {
        self.pool.remove(&user);
        self.metrics.losers += 1;
        self.event(slot, EventKind::Loser, format!("{user};cause=auction_closed"));
    }

    fn admit(&mut self, slot: Slot, batch: &[Bid]) {
        for bid in batch {
            self.event(
                slot,
                EventKind::Arrival,
                format!(
                    "{};value={};window=({},{}]",
                    bid.user, bid.valuation, bid.window.start, bid.window.end
                ),
            );
            self.pool.insert(bid.user, bid.clone());
            self.metrics.arrived += 1;
        }
    }

    fn market(&self) -> Market {
        Market {
            types: self.setup.types,
            users: self.pool.clone(),
            providers: self
                .setup
                .offers
                .iter()
                .map(|o| (o.provider, o.clone()))
                .collect(),
        }
    }
}

/// Singleton placement for the arrival-order baseline: cheapest provider
/// covering the whole demand on the earliest feasible slots, if the cost
/// stays within the user's valuation.
fn fcfs_place(live: &Live, bid: &Bid, now: Slot) -> Option<(ProviderId, Vec<Slot>)> {
    let mut best: Option<(Money, ProviderId, Vec<Slot>)> = None;
    for offer in &live.setup.offers {
        let cost = match offer.bundle_valuation(&bid.demand).finite() {
            Some(c) => c,
            None => continue,
        };
        // cost per slot must not exceed the per-slot valuation
        if cost.0 * i64::from(bid.length) > bid.valuation.0 {
            continue;
        }
        let first = bid.window.start.max(now) + 1;
        let slots: Vec<Slot> = (first..=bid.window.end)
            .filter(|&s| {
                offer.window.contains(s)
                    && (0..live.setup.types)
                        .all(|k| live.supply.remaining(offer, s, k) >= bid.demand[k])
            })
            .take(bid.length as usize)
            .collect();
        if slots.len() < bid.length as usize {
            continue;
        }
        if best.as_ref().map_or(true, |(c, _, _)| cost < *c) {
            best = Some((cost, offer.provider, slots));
        }
    }
    best.map(|(_, p, slots)| (p, slots))
}

/// Run one scheme over a pre-drawn arrival stream.
pub fn run_scheme(setup: &SimSetup, scheme: SchemeKind, stream: &[Vec<Bid>]) -> SimulationRun {
    let mut live = Live::new(setup);

    // single-group state: the pending allocation and its closing time
    let mut pending_single: Option<(Allocation, Slot)> = None;
    // formed-groups state: persistent structure plus per-group pendings
    let mut structure = GroupStructure::new(
        setup
            .offers
            .iter()
            .map(|o| coalition::Group::new([o.provider]))
            .collect(),
    );
    let mut pending_groups: BTreeMap<ProviderId, (Allocation, Slot)> = BTreeMap::new();
    let mut placement_rng = ChaCha8Rng::seed_from_u64(setup.placement_seed);

    for slot in 1..=setup.horizon {
        // 1. execute whatever closes now
        match scheme {
            SchemeKind::Fcfs => {}
            SchemeKind::SingleGroup => {
                if pending_single.as_ref().is_some_and(|(_, bct)| *bct == slot) {
                    let (alloc, _) = pending_single.take().unwrap();
                    live.execute(slot, &alloc);
                    // the market-wide auction closed; whoever it left out lost
                    let shut: Vec<UserId> = live.pool.keys().copied().collect();
                    for user in shut {
                        live.shut_out(slot, user);
                    }
                }
            }
            SchemeKind::FormedGroups => {
                let due: Vec<ProviderId> = pending_groups
                    .iter()
                    .filter(|(_, (_, bct))| *bct == slot)
                    .map(|(&a, _)| a)
                    .collect();
                for anchor in due {
                    let (alloc, _) = pending_groups.remove(&anchor).unwrap();
                    live.execute(slot, &alloc);
                    // served members leave; unserved members stay in the
                    // group and keep playing until their deadline
                    if let Some(gi) = structure.group_of_provider(anchor) {
                        for user in alloc.winners() {
                            structure.groups[gi].users.remove(&user);
                            structure.links.remove(&user);
                        }
                    }
                }
            }
        }

        // 2. deadline losers leave the market
        let lost = live.declare_losers(slot);
        if scheme == SchemeKind::FormedGroups {
            for user in &lost {
                if let Some(gi) = structure.group_of_user(*user) {
                    structure.groups[gi].users.remove(user);
                }
                structure.waiting.remove(user);
                structure.links.remove(user);
            }
        }

        // 3. admit the slot's arrivals; under formed groups each newcomer
        // starts in a uniformly random group, like the initial placement
        let batch = &stream[(slot - 1) as usize];
        live.admit(slot, batch);
        if scheme == SchemeKind::FormedGroups {
            for bid in batch {
                let pick = placement_rng.gen_range(0..structure.groups.len());
                structure.groups[pick].users.insert(bid.user);
            }
        }

        // 4. recompute
        match scheme {
            SchemeKind::Fcfs => {
                // one placement attempt per user, at arrival; supply only
                // shrinks afterwards, so a failed match never succeeds later
                for bid in batch {
                    if let Some((provider, slots)) = fcfs_place(&live, bid, slot) {
                        let mut alloc = Allocation::new();
                        for s in slots {
                            alloc.insert(bid.user, s, provider);
                        }
                        live.execute(slot, &alloc);
                    }
                }
            }
            SchemeKind::SingleGroup => {
                if !batch.is_empty() {
                    let bids: Vec<&Bid> = live.pool.values().collect();
                    let offers: Vec<&Offer> = setup.offers.iter().collect();
                    let alloc = find_instance_allocation(
                        setup.types,
                        &bids,
                        &offers,
                        &live.supply,
                        slot,
                    );
                    pending_single = alloc.bid_closing_time().map(|bct| (alloc, bct));
                }
            }
            SchemeKind::FormedGroups => {
                // the formation game plays every slot, with or without
                // newcomers, so members left after a close re-engage
                if !live.pool.is_empty() {
                    let market = live.market();
                    let mut migrations = Vec::new();
                    let mut next_pending = BTreeMap::new();
                    {
                        let ctx = EvalContext::new(
                            &market,
                            setup.kappa,
                            setup.delay_cost,
                            setup.migration_cost,
                            slot,
                            &live.supply,
                        );
                        let out = find_group_structure(&ctx, structure.clone(), &setup.formation);
                        for sweep in &out.sweeps {
                            for d in &sweep.decisions {
                                if let DecisionRecord::Migrate { user, to, .. } = d {
                                    migrations.push(format!("{user};to={to}"));
                                }
                            }
                        }
                        structure = out.structure;
                        for g in &structure.groups {
                            let eval = ctx.eval(g);
                            if let Some(bct) = eval.alloc.bid_closing_time() {
                                next_pending.insert(g.anchor(), (eval.alloc.clone(), bct));
                            }
                        }
                    }
                    for detail in migrations {
                        live.event(slot, EventKind::Migration, detail);
                    }
                    pending_groups = next_pending;
                }
            }
        }
    }

    live.metrics.unresolved = live.pool.len();
    assert_eq!(
        live.metrics.winners + live.metrics.losers + live.metrics.unresolved,
        live.metrics.arrived,
        "every arrival resolves exactly once"
    );

    SimulationRun {
        scheme,
        metrics: live.metrics,
        events: live.events,
        welfare_trace: live.welfare_trace,
    }
}

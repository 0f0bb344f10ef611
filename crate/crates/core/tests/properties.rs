mod common;

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{empty_bank, held_total, random_op, seed_total, seeded_bank, unbalanced_count};
use netbank::ledger::TransactionKind;
use netbank::pending::{PendingKind, PendingState};
use netbank::state::State;

fn run(seed: u64, ops: usize, mut each: impl FnMut(&State)) -> State {
    let (mut bank, clock) = empty_bank();
    let fx = seeded_bank(&mut bank);
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..ops {
        random_op(&mut bank, &clock, &fx, &mut rng);
        each(bank.state());
    }
    bank.state().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn money_is_conserved(seed in any::<u64>()) {
        let mut seen = None;
        run(seed, 150, |s| {
            let total = *seen.get_or_insert_with(|| seed_total(s));
            assert_eq!(held_total(s), total);
            assert_eq!(unbalanced_count(s), 0);
        });
    }

    #[test]
    fn balances_match_the_entries(seed in any::<u64>()) {
        let state = run(seed, 150, |_| {});
        prop_assert!(state.verify().is_empty(), "{:?}", state.verify());
    }

    #[test]
    fn each_confirmed_action_moved_money_once(seed in any::<u64>()) {
        let state = run(seed, 150, |_| {});
        let mut produced: HashMap<_, usize> = HashMap::new();
        for t in state.transfers() {
            *produced.entry(t.pending.clone()).or_default() += 1;
        }
        for p in state.payments() {
            *produced.entry(p.pending.clone()).or_default() += 1;
        }
        for p in state.pendings() {
            let moves_money = matches!(p.kind(), PendingKind::Transfer | PendingKind::RegisteredPayment | PendingKind::OpenPayment);
            let expected = usize::from(moves_money && p.state == PendingState::Confirmed);
            prop_assert_eq!(produced.get(&p.id).copied().unwrap_or(0), expected, "{:?}", p);
        }
        let transfer_txs = state.ledger().transactions().iter().filter(|t| t.kind == TransactionKind::Transfer).count();
        prop_assert_eq!(transfer_txs, state.transfers().count());
        let payment_txs = state.ledger().transactions().iter().filter(|t| t.kind == TransactionKind::BillPayment).count();
        prop_assert_eq!(payment_txs, state.payments().count());
    }

    #[test]
    fn at_most_one_active_registration_per_pair(seed in any::<u64>()) {
        run(seed, 150, |s| {
            let mut pairs = HashSet::new();
            for r in s.registrations().filter(|r| r.active) {
                assert!(pairs.insert((r.customer.clone(), r.corporation.clone())));
            }
        });
    }

    #[test]
    fn replay_is_deterministic(seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let clock = netbank::ManualClock::default();
        let config = netbank::Config { flush: netbank::journal::FlushPolicy::Batch, ..common::fast_config() };
        let (mut bank, _) = netbank::Bank::open(dir.path(), config, std::sync::Arc::new(clock.clone())).unwrap();
        let fx = seeded_bank(&mut bank);
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..60 {
            random_op(&mut bank, &clock, &fx, &mut rng);
        }
        let live = bank.state().canonical();
        drop(bank);
        prop_assert_eq!(netbank::bank::load_state(dir.path()).unwrap().0.canonical(), live);
    }
}

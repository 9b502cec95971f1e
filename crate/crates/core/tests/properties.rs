use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use schoolmatch::*;

#[derive(Debug, Clone)]
struct Instance {
    problem: Problem,
    prefs: PreferenceSet,
    stb: TieBreaker,
    mtb: TieBreaker,
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Up to `max_schools` schools of 1-3 places and up to `max_pupils` pupils
/// who fit.
fn instance(max_schools: usize, max_pupils: usize) -> impl Strategy<Value = Instance> {
    (1..=max_schools)
        .prop_flat_map(move |m| {
            prop::collection::vec(1..=3usize, m).prop_flat_map(move |caps| {
                let places: usize = caps.iter().sum();
                (Just(caps), 1..=places.min(max_pupils))
            })
        })
        .prop_flat_map(|(caps, n)| {
            let m = caps.len();
            (
                Just(caps),
                prop::collection::vec(permutation(m), n),
                permutation(n),
                prop::collection::vec(permutation(n), m),
            )
        })
        .prop_map(|(caps, rankings, order, orders)| {
            let n = rankings.len();
            let m = caps.len();
            Instance {
                problem: Problem::new(caps, n).unwrap(),
                prefs: PreferenceSet::new(
                    m,
                    rankings
                        .into_iter()
                        .map(|r| Preference::new(r).unwrap())
                        .collect(),
                )
                .unwrap(),
                stb: TieBreaker::single(order).unwrap(),
                mtb: TieBreaker::multiple(orders).unwrap(),
            }
        })
}

fn q(inst: &Instance, sol: &Solution) -> f64 {
    evaluate(&inst.problem, &inst.prefs, sol)
        .unwrap()
        .average_rank
}

fn total(inst: &Instance, sol: &Solution) -> usize {
    evaluate(&inst.problem, &inst.prefs, sol)
        .unwrap()
        .total_rank
}

fn all_mechanisms(inst: &Instance) -> Vec<Solution> {
    let (p, prefs) = (&inst.problem, &inst.prefs);
    vec![
        boston(p, prefs, &inst.stb).unwrap(),
        boston(p, prefs, &inst.mtb).unwrap(),
        deferred_acceptance(p, prefs, &inst.stb).unwrap(),
        deferred_acceptance(p, prefs, &inst.mtb).unwrap(),
        zeeburg(p, prefs, &inst.stb).unwrap().solution,
    ]
}

// Pupil i and school s block if i prefers s to its own school and s either
// has a free place or holds someone i outranks.
fn blocking_pairs(inst: &Instance, tb: &TieBreaker, sol: &Solution) -> usize {
    let m = inst.problem.num_schools();
    let occ = sol.occupancy(m);
    let mut count = 0;
    for i in 0..sol.len() {
        let own = inst.prefs.rank(i, sol.school_of(i));
        for (s, &taken) in occ.iter().enumerate() {
            if inst.prefs.rank(i, s) >= own {
                continue;
            }
            let free = taken < inst.problem.capacity(s);
            let outranks = (0..sol.len())
                .any(|k| sol.school_of(k) == s && tb.priority(s, i) < tb.priority(s, k));
            if free || outranks {
                count += 1;
            }
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_mechanism_is_feasible(inst in instance(5, 12)) {
        for sol in all_mechanisms(&inst) {
            prop_assert!(sol.check_feasible(&inst.problem).is_ok());
            let r = evaluate(&inst.problem, &inst.prefs, &sol).unwrap();
            prop_assert_eq!(r.histogram.iter().sum::<usize>(), inst.problem.num_pupils());
            prop_assert!(r.average_rank >= 1.0 && r.average_rank <= inst.problem.num_schools() as f64);
        }
    }

    #[test]
    fn mechanisms_are_deterministic(inst in instance(4, 10)) {
        prop_assert_eq!(all_mechanisms(&inst), all_mechanisms(&inst));
    }

    #[test]
    fn boston_maximises_first_choices(inst in instance(5, 12)) {
        let m = inst.problem.num_schools();
        let mut demand = vec![0usize; m];
        for p in inst.prefs.iter() {
            demand[p.first()] += 1;
        }
        let expected: usize = (0..m).map(|j| demand[j].min(inst.problem.capacity(j))).sum();
        for tb in [&inst.stb, &inst.mtb] {
            let sol = boston(&inst.problem, &inst.prefs, tb).unwrap();
            let r = evaluate(&inst.problem, &inst.prefs, &sol).unwrap();
            prop_assert_eq!(r.rank_one_count(), expected);
        }
    }

    #[test]
    fn deferred_acceptance_is_stable(inst in instance(5, 12)) {
        for tb in [&inst.stb, &inst.mtb] {
            let sol = deferred_acceptance(&inst.problem, &inst.prefs, tb).unwrap();
            prop_assert_eq!(blocking_pairs(&inst, tb, &sol), 0);
        }
    }

    #[test]
    fn zeeburg_is_pareto_efficient(inst in instance(5, 12)) {
        let out = zeeburg(&inst.problem, &inst.prefs, &inst.stb).unwrap();
        prop_assert!(scan_pareto(&inst.problem, &inst.prefs, &out.solution).unwrap().is_empty());
    }

    #[test]
    fn zeeburg_without_contention_needs_no_lottery(
        m in 1..=6usize,
        seed in any::<u64>(),
    ) {
        // every pupil has a distinct first choice
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = Problem::uniform(m, 1, m).unwrap();
        let prefs = PreferenceSet::new(
            m,
            (0..m)
                .map(|i| {
                    let mut r: Vec<usize> = (0..m).filter(|&s| s != i).collect();
                    rand::seq::SliceRandom::shuffle(r.as_mut_slice(), &mut rng);
                    r.insert(0, i);
                    Preference::new(r).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let tb = make_tiebreaker(TieBreakMode::Single, &problem, &mut rng);
        let out = zeeburg(&problem, &prefs, &tb).unwrap();
        prop_assert_eq!(out.tiebreak_decisions, 0);
        prop_assert_eq!(out.solution.assignment().to_vec(), (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn exchange_never_worsens(inst in instance(5, 12)) {
        for start in all_mechanisms(&inst) {
            for variant in [Variant::MinRank, Variant::MaxRank] {
                let out = pairwise_exchange(&inst.problem, &inst.prefs, &start, variant).unwrap();
                prop_assert!(out.solution.check_feasible(&inst.problem).is_ok());
                prop_assert!(total(&inst, &out.solution) <= total(&inst, &start));
                prop_assert_eq!(out.swaps == 0, out.solution == start);
                prop_assert!(
                    scan_pareto(&inst.problem, &inst.prefs, &out.solution).unwrap().is_empty()
                );
                prop_assert_eq!(
                    out.solution.occupancy(inst.problem.num_schools()),
                    start.occupancy(inst.problem.num_schools())
                );
            }
        }
    }

    #[test]
    fn one_pass_reaches_a_fixed_point(inst in instance(5, 12)) {
        for start in all_mechanisms(&inst) {
            for variant in [Variant::MinRank, Variant::MaxRank] {
                let out = pairwise_exchange(&inst.problem, &inst.prefs, &start, variant).unwrap();
                prop_assert!(is_converged(&inst.problem, &inst.prefs, &out.solution, variant).unwrap());
                let again =
                    pairwise_exchange(&inst.problem, &inst.prefs, &out.solution, variant).unwrap();
                prop_assert_eq!(again.swaps, 0);
                prop_assert_eq!(again.solution, out.solution);
            }
        }
    }

    #[test]
    fn no_mechanism_beats_the_oracle(inst in instance(4, 8)) {
        let best = optimal_q(&inst.problem, &inst.prefs).unwrap();
        prop_assert!(best.solution.check_feasible(&inst.problem).is_ok());
        prop_assert_eq!(total(&inst, &best.solution), best.total_rank);
        for start in all_mechanisms(&inst) {
            prop_assert!(q(&inst, &start) >= best.average_rank);
            let pe = pairwise_exchange(&inst.problem, &inst.prefs, &start, Variant::MinRank).unwrap();
            prop_assert!(total(&inst, &pe.solution) >= best.total_rank);
        }
    }

    #[test]
    fn oracle_matches_naive_enumeration(inst in instance(4, 6)) {
        let (m, n) = (inst.problem.num_schools(), inst.problem.num_pupils());
        let mut best: Option<(usize, Vec<usize>)> = None;
        // every vector in 0..m^n, in lexicographic order
        for code in 0..m.pow(n as u32) {
            let mut c = code;
            let mut a = vec![0; n];
            for slot in a.iter_mut().rev() {
                *slot = c % m;
                c /= m;
            }
            let sol = Solution::new(a.clone());
            if sol.check_feasible(&inst.problem).is_err() {
                continue;
            }
            let t = total(&inst, &sol);
            if best.as_ref().is_none_or(|(b, _)| t < *b) {
                best = Some((t, a));
            }
        }
        let (t, a) = best.unwrap();
        let opt = optimal_q(&inst.problem, &inst.prefs).unwrap();
        prop_assert_eq!(opt.total_rank, t);
        prop_assert_eq!(opt.solution.assignment().to_vec(), a);
    }

    #[test]
    fn strategy_transforms_are_idempotent_permutations(
        ranking in (1..=10usize).prop_flat_map(permutation),
        weights in prop::collection::vec(prop::sample::select(vec![1.0, 2.0, 10.0, 50.0]), 10),
    ) {
        let m = ranking.len();
        let pop = &weights[..m];
        let t = Preference::new(ranking).unwrap();
        for f in [apply_cautious, apply_gambling] {
            let s = f(&t, pop);
            let mut sorted = s.ranking().to_vec();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..m).collect::<Vec<_>>());
            prop_assert_eq!(f(&s, pop), s.clone());
        }
        let g = apply_gambling(&t, pop);
        prop_assert_eq!(g.first(), t.first());
        let c = apply_cautious(&t, pop);
        let k = m.min(3);
        prop_assert_eq!(&c.ranking()[k..], &t.ranking()[k..]);
        // least popular first within the reordered block
        prop_assert!(c.ranking()[..k].windows(2).all(|w| pop[w[0]] <= pop[w[1]]));
        prop_assert!(g.ranking()[1..].windows(2).all(|w| pop[w[0]] <= pop[w[1]]));
    }

    #[test]
    fn completion_extends_each_list(
        m in 1..=6usize,
        lists in prop::collection::vec(prop::collection::vec(0..6usize, 0..6), 1..8),
    ) {
        let lists: Vec<Vec<usize>> = lists
            .into_iter()
            .map(|l| {
                let mut seen = vec![false; m];
                l.into_iter().filter(|&s| s < m && !std::mem::replace(&mut seen[s], true)).collect()
            })
            .collect();
        let problem = Problem::uniform(m, lists.len(), lists.len()).unwrap();
        let done = complete_preferences(&lists, &problem).unwrap();
        for (partial, full) in lists.iter().zip(done.iter()) {
            prop_assert_eq!(&full.ranking()[..partial.len()], partial.as_slice());
        }
        prop_assert_eq!(complete_preferences(
            &done.iter().map(|p| p.ranking().to_vec()).collect::<Vec<_>>(),
            &problem,
        ).unwrap(), done);
    }
}

#[test]
fn first_choice_frequencies_follow_weights() {
    let problem = builtin_problem();
    let experiments = 100;
    for (name, weights) in [
        (
            BuiltinScenario::B,
            vec![10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
        ),
        (
            BuiltinScenario::C,
            vec![50.0, 50.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 1.0, 1.0],
        ),
    ] {
        let scenario = builtin_scenario(name);
        let mut counts = [0usize; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..experiments {
            let prefs = generate_dataset(&scenario, &problem, &mut rng).unwrap();
            for p in prefs.iter() {
                counts[p.first()] += 1;
            }
        }
        let draws = (experiments * problem.num_pupils()) as f64;
        let sum: f64 = weights.iter().sum();
        for (j, &w) in weights.iter().enumerate() {
            let p = w / sum;
            let freq = counts[j] as f64 / draws;
            let sigma = (p * (1.0 - p) / draws).sqrt();
            assert!(
                (freq - p).abs() < 3.0 * sigma,
                "{name:?} school {}: {freq} vs {p}",
                j + 1
            );
        }
    }
}

#[test]
fn two_populations_split_exactly() {
    let scenario = builtin_scenario(BuiltinScenario::D);
    assert_eq!(scenario.population_sizes(1000), vec![600, 400]);
    let avg = scenario.average_popularity();
    assert!((avg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(avg[0] > avg[9]);
}

#[test]
fn da_with_multiple_lotteries_can_waste_a_swap() {
    // Pupils 1 and 2 each hold the other's first choice under DA-MTB.
    let problem = Problem::uniform(3, 1, 3).unwrap();
    let prefs =
        PreferenceSet::from_one_based(3, &[vec![2, 1, 3], vec![1, 2, 3], vec![1, 3, 2]]).unwrap();
    let tb = TieBreaker::multiple(vec![vec![0, 2, 1], vec![1, 0, 2], vec![0, 1, 2]]).unwrap();
    let sol = deferred_acceptance(&problem, &prefs, &tb).unwrap();
    assert_eq!(sol.to_one_based(), vec![1, 2, 3]);
    assert_eq!(scan_pareto(&problem, &prefs, &sol).unwrap(), vec![(0, 1)]);

    let z = zeeburg(
        &problem,
        &prefs,
        &TieBreaker::single(vec![0, 1, 2]).unwrap(),
    )
    .unwrap();
    assert!(scan_pareto(&problem, &prefs, &z.solution)
        .unwrap()
        .is_empty());
}

#[test]
fn zeeburg_invariants_hold_stepwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let problem = Problem::new(vec![3, 2, 2, 1], 7).unwrap();
    for _ in 0..50 {
        let prefs = generate_dataset(
            &Scenario::single(vec![5.0, 3.0, 1.0, 1.0]).unwrap(),
            &problem,
            &mut rng,
        )
        .unwrap();
        let tb = make_tiebreaker(TieBreakMode::Single, &problem, &mut rng);
        let mut state = ZeeburgState::new(&problem, &prefs, &tb).unwrap();
        while !state.is_done() {
            if !state.admit_whole_queue() {
                assert!(state.force_decision());
            }
            state.check_invariants(&problem).unwrap();
        }
        let sol = state.into_solution().unwrap();
        assert_eq!(sol, zeeburg(&problem, &prefs, &tb).unwrap().solution);
    }
}

mod common;

use std::collections::HashSet;
use std::sync::{Arc, Mutex};

use common::{arb_model, index_of, Model};
use proptest::prelude::*;
use regpred_core::bisect::run_bisect_multi;
use regpred_core::oracle::{Labels, OracleError, VerdictSource};
use regpred_core::{
    run_rpa, Action, EngineConfig, RpaEngine, Strategy, ValidityOracle, Vertex, VertexId,
};

/// Recorded verdicts that also log every evaluation.
struct Counting {
    labels: Labels,
    seen: Arc<Mutex<Vec<String>>>,
}

impl VerdictSource for Counting {
    fn evaluate(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        self.seen.lock().unwrap().push(id.to_string());
        self.labels
            .get(id.as_str())
            .ok_or_else(|| OracleError::UnknownVertex(id.to_string()))
    }
}

fn configs() -> Vec<EngineConfig> {
    Strategy::ALL
        .into_iter()
        .flat_map(|strategy| {
            [true, false].map(|propagate| EngineConfig {
                strategy,
                propagate,
            })
        })
        .collect()
}

fn leaves(m: &Model, g: &regpred_core::Radag) -> Vec<Vertex> {
    m.invalid_sinks()
        .iter()
        .map(|&l| g.lookup(&Model::name(l)).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rpa_results_are_regression_predecessors(m in arb_model(40)) {
        let g = m.graph();
        let leaves = leaves(&m, &g);
        for config in configs() {
            let seen = Arc::new(Mutex::new(Vec::new()));
            let mut oracle = ValidityOracle::new(Counting { labels: m.labels(), seen: seen.clone() });
            let report = run_rpa(&g, &leaves, &mut oracle, config).unwrap();
            prop_assert_eq!(report.results.len(), leaves.len());
            for (&(leaf, rp), &want) in report.results.iter().zip(&leaves) {
                prop_assert_eq!(leaf, want);
                let (u, v, l) = (index_of(&g, rp.valid_end), index_of(&g, rp.invalid_end), index_of(&g, leaf));
                prop_assert!(m.is_regression_predecessor(u, v, l), "{config:?}: ({u},{v}) for {l}");
            }
            let seen = seen.lock().unwrap();
            let distinct: HashSet<_> = seen.iter().collect();
            prop_assert_eq!(distinct.len(), seen.len(), "vertex evaluated twice");
            prop_assert_eq!(oracle.distinct_queries(), seen.len());
            let mut emitted = report.emitted.clone();
            emitted.sort();
            let mut expected = leaves.clone();
            expected.sort();
            prop_assert_eq!(emitted, expected);
        }
    }

    #[test]
    fn bisect_results_are_regression_predecessors(m in arb_model(40)) {
        let g = m.graph();
        let leaves = leaves(&m, &g);
        let mut oracle = ValidityOracle::recorded(m.labels());
        let out = run_bisect_multi(&g, &leaves, &mut oracle).unwrap();
        for (leaf, o) in out {
            let (u, v, l) = (index_of(&g, o.point.valid_end), index_of(&g, o.point.invalid_end), index_of(&g, leaf));
            prop_assert!(m.is_regression_predecessor(u, v, l), "({u},{v}) for {l}");
        }
    }

    #[test]
    fn stepping_reproduces_the_driver(m in arb_model(40)) {
        let g = m.graph();
        let leaves = leaves(&m, &g);
        for config in configs() {
            let mut oracle = ValidityOracle::recorded(m.labels());
            let report = run_rpa(&g, &leaves, &mut oracle, config).unwrap();
            let mut engine = RpaEngine::new(g.clone(), &leaves, config).unwrap();
            let mut emitted = Vec::new();
            loop {
                match engine.next_action().unwrap() {
                    Action::Query(v) => engine.submit_answer(v, m.valid[index_of(&g, v)]).unwrap(),
                    Action::Emit { leaf, .. } => emitted.push(leaf),
                    Action::Done => break,
                }
            }
            let stepped = engine.report();
            prop_assert_eq!(stepped.query_log, report.query_log);
            prop_assert_eq!(stepped.results, report.results);
            prop_assert_eq!(emitted, report.emitted);
        }
    }

    #[test]
    fn propagated_leaves_share_the_point(m in arb_model(40)) {
        let g = m.graph();
        let leaves = leaves(&m, &g);
        let mut oracle = ValidityOracle::recorded(m.labels());
        let config = EngineConfig { strategy: Strategy::Multiplying, propagate: true };
        let report = run_rpa(&g, &leaves, &mut oracle, config).unwrap();
        for it in &report.iterations {
            let Some(rp) = it.point else { continue };
            for &l in &it.propagated {
                let got = report.results.iter().find(|r| r.0 == l).unwrap().1;
                prop_assert_eq!(got, rp);
            }
        }
    }
}

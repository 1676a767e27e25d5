use std::collections::HashSet;

use mutantgraph::evalkit::{generate_synthetic, SynthConfig};
use mutantgraph::simgraph::{build_graph, build_graph_with, ApproxParams, GraphMode};

fn matrix(seed: u64) -> mutantgraph::embedstore::EmbeddingMatrix {
    let cfg = SynthConfig {
        posts: 4_000,
        dim: 64,
        campaigns: 30,
        ..SynthConfig::default()
    };
    generate_synthetic(&cfg, seed).unwrap().matrix.unit_normalize().unwrap()
}

#[test]
fn approx_recall_and_precision() {
    let m = matrix(3);
    let exact = build_graph(&m, 0.85, GraphMode::Exact).unwrap();
    let approx = build_graph(&m, 0.85, GraphMode::Approx).unwrap();
    let truth: HashSet<(u32, u32)> = exact.edge_pairs().into_iter().collect();
    for e in approx.edges() {
        assert!(truth.contains(&e.pair()), "false edge {:?}", e.pair());
        assert_eq!(Some(e.score), exact.score(e.a, e.b));
    }
    let recall = approx.edges().len() as f64 / truth.len() as f64;
    assert!(recall >= 0.99, "recall {recall}");
    let audit = approx.diagnostics().approx.unwrap();
    assert!(audit.recall >= 0.99);
    assert!(audit.sampled_rows >= 32);
}

#[test]
fn approx_ignores_thread_count() {
    let m = matrix(4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| build_graph_with(&m, 0.85, GraphMode::Approx, &ApproxParams::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn unreachable_recall_falls_back_to_exact() {
    let m = matrix(5);
    let params = ApproxParams {
        target_recall: 1.01,
        max_attempts: 1,
        ..ApproxParams::default()
    };
    let g = build_graph_with(&m, 0.85, GraphMode::Approx, &params).unwrap();
    let exact = build_graph(&m, 0.85, GraphMode::Exact).unwrap();
    assert_eq!(g.edges(), exact.edges());
    assert!(g.diagnostics().approx.unwrap().fell_back_to_exact);
}

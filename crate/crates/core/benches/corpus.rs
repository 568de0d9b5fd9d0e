use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subgrammar::*;

fn corpus_modes(c: &mut Criterion) {
    let (full, lex) = fixture::grammar();
    let base = fixture::corpus();
    let corpus: Vec<SemanticSpec> = base.iter().cycle().take(base.len() * 20).cloned().collect();
    let training = collect_goal_types(&full, &lex, &base, Execution::Parallel);
    let (sub, _) = extract_subgrammar(&full, &training.goal, &ExtractOptions::default()).unwrap();

    let mut group = c.benchmark_group("corpus");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let name = format!("{exec:?}").to_lowercase();
        group.bench_with_input(BenchmarkId::new("train", &name), &exec, |b, &exec| {
            b.iter(|| collect_goal_types(&full, &lex, &corpus, exec))
        });
        group.bench_with_input(BenchmarkId::new("verify", &name), &exec, |b, &exec| {
            b.iter(|| verify_consistency((&full, &lex), (&sub, &lex), &corpus, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_modes);
criterion_main!(benches);

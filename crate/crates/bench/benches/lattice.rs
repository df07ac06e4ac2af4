use criterion::{black_box, criterion_group, criterion_main, Criterion};

use corrtail_core::corpus::{random_graphs, RandomSpec};
use corrtail_core::lattice::{enumerate_saturated_hereditary, tails_lattice_map};

fn bench(c: &mut Criterion) {
    let graphs = random_graphs(&RandomSpec::standard(50, 7));
    c.bench_function("lattice 50 random graphs", |b| {
        b.iter(|| {
            graphs
                .iter()
                .map(|(_, g)| enumerate_saturated_hereditary(black_box(g)).unwrap().len())
                .sum::<usize>()
        })
    });
    c.bench_function("tails lattice map 50 random graphs", |b| {
        b.iter(|| {
            graphs
                .iter()
                .all(|(_, g)| tails_lattice_map(black_box(g)).is_ok())
        })
    });
}

criterion_group!(benches, bench);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_bigint::BigInt;
use relrips_core::homology::{boundary_matrices, reduced_homology, smith_normal_form, IntMatrix};
use relrips_core::hyperbolicity::{delta_four_point, Sample};
use relrips_core::rips::RelativeEdgeTable;
use relrips_core::{build_ball, build_coned_ball, fixtures, RipsParams};

fn ball(c: &mut Criterion) {
    let f2 = fixtures::f2();
    c.bench_function("ball/f2_r6", |b| {
        b.iter(|| build_ball(&f2.group, 6).unwrap())
    });
    let z2 = fixtures::z2_rel_a();
    c.bench_function("ball/z2_r10", |b| {
        b.iter(|| build_ball(&z2.group, 10).unwrap())
    });
}

fn delta(c: &mut Criterion) {
    let f = fixtures::f2_rel_a();
    let cb = build_coned_ball(build_ball(&f.group, 4).unwrap(), &f.group, &f.peripheral);
    let adj = cb.adjacency_lists();
    c.bench_function("delta/f2_rel_a_r4_exact", |b| {
        b.iter(|| delta_four_point(&adj, Sample::All).unwrap())
    });
    c.bench_function("delta/f2_rel_a_r4_sampled", |b| {
        b.iter(|| {
            delta_four_point(
                &adj,
                Sample::Random {
                    count: 20_000,
                    seed: 7,
                },
            )
            .unwrap()
        })
    });
}

fn edge_table(c: &mut Criterion) {
    let f = fixtures::f2_rel_a();
    let cb = build_coned_ball(build_ball(&f.group, 4).unwrap(), &f.group, &f.peripheral);
    c.bench_function("edges/f2_rel_a_r4_d3", |b| {
        b.iter(|| RelativeEdgeTable::new(&cb, 3))
    });
    let table = RelativeEdgeTable::new(&cb, 3);
    let params = RipsParams {
        r: 1,
        d: 3,
        s: 5,
        k_max: 2,
        radius: 4,
    };
    c.bench_function("edges/f2_rel_a_r4_complex_135", |b| {
        b.iter(|| table.complex(&cb, params, 1 << 24).unwrap())
    });
}

fn homology(c: &mut Criterion) {
    let f = fixtures::f2_rel_a();
    let cb = build_coned_ball(build_ball(&f.group, 4).unwrap(), &f.group, &f.peripheral);
    let params = RipsParams {
        r: 1,
        d: 3,
        s: 5,
        k_max: 2,
        radius: 4,
    };
    let x = RelativeEdgeTable::new(&cb, 3)
        .complex(&cb, params, 1 << 24)
        .unwrap();
    c.bench_function("homology/f2_rel_a_r4_h1", |b| {
        b.iter(|| {
            let cc = boundary_matrices(&x, 2).unwrap();
            reduced_homology(&cc, 1).unwrap()
        })
    });
}

fn snf(c: &mut Criterion) {
    // deterministic dense 40 x 40 matrix with small entries
    let n = 40;
    let mut state = 0x9e37_79b9_u64;
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((state >> 33) % 7) as i64 - 3
                })
                .collect()
        })
        .collect();
    let a = IntMatrix::from_rows(&rows);
    c.bench_function("snf/dense_40", |b| {
        b.iter_batched(
            || a.clone(),
            |m| smith_normal_form(&m),
            BatchSize::SmallInput,
        )
    });
    let mut diag = IntMatrix::zeros(n, n);
    for i in 0..n {
        diag.set(i, i, BigInt::from((i % 5 + 1) as i64));
    }
    c.bench_function("snf/diagonal_40", |b| b.iter(|| smith_normal_form(&diag)));
}

criterion_group!(benches, ball, delta, edge_table, homology, snf);
criterion_main!(benches);

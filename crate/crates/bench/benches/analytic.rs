use criterion::{criterion_group, criterion_main, Criterion};
use heckelab::geometry::{petersson_inner, FundamentalDomainMesh};
use heckelab::hecke::eigenforms;
use heckelab::lfunctions::{stirling_ratio, sym2_l_afe, AfeConfig};
use heckelab::moments::{prime_sum_experiment, PrimeSumKind};
use heckelab::spectral::bessel::bessel_j_imag;
use rug::Complex;

fn lvalues(c: &mut Criterion) {
    let delta = &eigenforms(12, 100).unwrap()[0];
    let cfg = AfeConfig::default();
    let one = Complex::with_val(cfg.prec, (1, 0));
    let mut g = c.benchmark_group("lfunctions");
    g.sample_size(10);
    g.bench_function("L(1, sym2 Delta) by functional equation", |b| b.iter(|| sym2_l_afe(delta, &one, &cfg).unwrap()));
    g.bench_function("stirling ratio k = 200, t = 20000", |b| b.iter(|| stirling_ratio(200, 20_000.0, 192).unwrap()));
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let f = &eigenforms(24, 100).unwrap()[0];
    let mut g = c.benchmark_group("geometry");
    g.sample_size(10);
    for cells in [16usize, 32, 64] {
        let mesh = FundamentalDomainMesh::new(8.0, cells, cells, 8).unwrap();
        g.bench_function(format!("<f, f> weight 24, {cells}x{cells}"), |b| b.iter(|| petersson_inner(f, f, &mesh).unwrap()));
    }
    g.finish();
}

fn special(c: &mut Criterion) {
    let mut g = c.benchmark_group("special");
    g.bench_function("J_{2it}(x), t = 5, x = 7.5", |b| b.iter(|| bessel_j_imag(5.0, 7.5, 128).unwrap()));
    g.sample_size(10);
    let delta = &eigenforms(12, 100).unwrap()[0];
    g.bench_function("prime sum sym2 to 10^5", |b| {
        b.iter(|| prime_sum_experiment(delta, None, 100_000, PrimeSumKind::Sym2OverP).unwrap())
    });
    g.finish();
}

criterion_group!(benches, lvalues, quadrature, special);
criterion_main!(benches);

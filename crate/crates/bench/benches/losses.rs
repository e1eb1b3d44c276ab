use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;

use cortexgeo::losses::{chamfer_curvature, edge_loss, intra_normal_consistency, laplacian_displacement};
use cortexgeo::mesh::build_adjacency;
use cortexgeo::metrics::assd;
use cortexgeo::optimizer::{graph_conv_forward, graph_conv_vjp};
use cortexgeo::spatial::{PointIndex, SurfaceIndex};
use cortexgeo::template::make_icosphere;
use cortexgeo::{GraphConvParams, Vec3};
use cortexgeo_bench::{bumpy_sphere, chamfer_clouds, cube_points};

fn chamfer(c: &mut Criterion) {
    let mut g = c.benchmark_group("chamfer");
    g.sample_size(10);
    let (pred, gt) = chamfer_clouds(168_058, 130_000);
    g.bench_function("curvature_168k_vs_130k", |b| b.iter(|| chamfer_curvature(black_box(&pred), black_box(&gt)).unwrap()));
    let (pred, gt) = chamfer_clouds(10_000, 10_000);
    g.bench_function("curvature_10k_vs_10k", |b| b.iter(|| chamfer_curvature(black_box(&pred), black_box(&gt)).unwrap()));
    g.finish();
}

fn regularizers(c: &mut Criterion) {
    let mesh = bumpy_sphere(6);
    let adj = build_adjacency(&mesh);
    let disp: Vec<Vec3> = mesh.vertices().iter().map(|v| v * 0.01).collect();
    c.bench_function("intra_nc_41k", |b| b.iter(|| intra_normal_consistency(black_box(&mesh))));
    c.bench_function("laplacian_displacement_41k", |b| {
        b.iter(|| laplacian_displacement(black_box(&adj), black_box(&disp)).unwrap())
    });
    c.bench_function("edge_loss_41k", |b| b.iter(|| edge_loss(black_box(&mesh)).unwrap()));
}

fn spatial(c: &mut Criterion) {
    let points = cube_points(100_000, 1);
    let queries = cube_points(10_000, 2);
    c.bench_function("kdtree_build_100k", |b| b.iter(|| PointIndex::build(black_box(&points)).unwrap()));
    let index = PointIndex::build(&points).unwrap();
    c.bench_function("kdtree_nearest_10k", |b| b.iter(|| index.nearest_batch(black_box(&queries))));
    let mesh = bumpy_sphere(5);
    let surface = SurfaceIndex::build(&mesh).unwrap();
    c.bench_function("bvh_closest_10k", |b| b.iter(|| surface.closest_points(black_box(&queries))));
}

fn metrics(c: &mut Criterion) {
    let mut g = c.benchmark_group("metrics");
    g.sample_size(10);
    let a = make_icosphere(5, [1.0; 3]).unwrap();
    let b = bumpy_sphere(5);
    g.bench_function("assd_100k_samples", |bch| bch.iter(|| assd(black_box(&a), black_box(&b), 100_000, 0).unwrap()));
    g.finish();
}

fn graph_conv(c: &mut Criterion) {
    let mesh = make_icosphere(5, [1.0; 3]).unwrap();
    let adj = build_adjacency(&mesh);
    let (d_in, d_out) = (16, 16);
    let values = cube_points(mesh.vertex_count() * d_in / 3 + 1, 3);
    let flat: Vec<f64> = values.iter().flat_map(|p| [p.x, p.y, p.z]).take(mesh.vertex_count() * d_in).collect();
    let features = DMatrix::from_row_slice(mesh.vertex_count(), d_in, &flat);
    let params = GraphConvParams::new(
        DMatrix::from_fn(d_out, d_in, |i, j| ((i * 7 + j) % 5) as f64 * 0.1 - 0.2),
        DMatrix::from_fn(d_out, d_in, |i, j| ((i + j * 3) % 7) as f64 * 0.05 - 0.15),
        nalgebra::DVector::from_element(d_out, 0.1),
        nalgebra::DVector::from_element(d_out, -0.1),
    )
    .unwrap();
    c.bench_function("graph_conv_forward_10k", |b| {
        b.iter(|| graph_conv_forward(black_box(&features), &adj, &params).unwrap())
    });
    let upstream = graph_conv_forward(&features, &adj, &params).unwrap();
    c.bench_function("graph_conv_vjp_10k", |b| {
        b.iter(|| graph_conv_vjp(black_box(&upstream), &features, &adj, &params).unwrap())
    });
}

criterion_group!(benches, chamfer, regularizers, spatial, metrics, graph_conv);
criterion_main!(benches);

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use omnigaze::camera::{CameraModel, EquidistantCamera, FisheyeProjection, KannalaBrandtCamera, UnitVector3};
use omnigaze::reproject::{remap_fisheye, render_fisheye, CubemapSet, FisheyeImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cameras(size: u32) -> [(&'static str, CameraModel); 2] {
    [
        ("equidistant", EquidistantCamera::derive(size, size, PI).unwrap().into()),
        ("kannala_brandt", KannalaBrandtCamera::fit_to_image(size, size, PI, [0.05, 0.0, 0.0, 0.0]).unwrap().into()),
    ]
}

fn projection(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let dirs: Vec<UnitVector3> = (0..10_000).map(|_| UnitVector3::from_spherical(r.random_range(0.0..PI / 2.0), r.random_range(-PI..PI))).collect();
    let mut g = c.benchmark_group("projection");
    g.throughput(Throughput::Elements(dirs.len() as u64));
    for (name, cam) in cameras(1024) {
        let pixels: Vec<_> = dirs.iter().map(|d| cam.project(d).unwrap()).collect();
        g.bench_function(BenchmarkId::new("project", name), |b| b.iter(|| dirs.iter().filter_map(|d| cam.project(black_box(d))).count()));
        g.bench_function(BenchmarkId::new("unproject", name), |b| b.iter(|| pixels.iter().filter_map(|p| cam.unproject(black_box(*p))).count()));
    }
    g.finish();
}

fn render(c: &mut Criterion) {
    let cubemap = CubemapSet::from_fn(512, |d| [d.x(), d.y(), d.z()].map(|v| (127.5 * (1.0 + v)) as u8));
    let mut g = c.benchmark_group("render");
    g.sample_size(10);
    for size in [512u32, 1024] {
        let cam: CameraModel = EquidistantCamera::derive(size, size, PI).unwrap().into();
        g.throughput(Throughput::Elements(size as u64 * size as u64));
        for threads in [1usize, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            g.bench_function(BenchmarkId::new(format!("{size}px"), format!("{threads}threads")), |b| {
                b.iter(|| pool.install(|| render_fisheye(&cubemap, &cam)))
            });
        }
    }
    g.finish();
}

fn remap(c: &mut Criterion) {
    let [(_, eq), (_, kb)] = cameras(1024);
    let src = FisheyeImage::from_pixels(render_fisheye(&CubemapSet::from_fn(256, |_| [90, 120, 150]), &eq).pixels, eq);
    let mut g = c.benchmark_group("remap");
    g.sample_size(10);
    g.bench_function("equidistant_to_kb_1024", |b| b.iter(|| remap_fisheye(&src, &kb)));
    g.finish();
}

criterion_group!(benches, projection, render, remap);
criterion_main!(benches);

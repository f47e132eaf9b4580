use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use knurl_core::config::{PatternConfig, RegionConfig, TextureConfig};
use knurl_core::fixtures;
use knurl_core::pattern::{extrapolate_lattice, ElementId, Expander, RepetitionSeed};
use knurl_core::region::{closest_face, harmonic_field, infer_region, CancelToken, DistortionField, SurfaceRegion};
use knurl_core::surface_map::{Placement, SurfaceMap, SurfacePoint, Vec2};
use knurl_core::texture::{apply_pattern, TextureElement, TextureStyle};
use knurl_core::{Execution, Point};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn distortion(c: &mut Criterion) {
    let mesh = fixtures::icosphere(20.0, 4);
    let radius = 0.05 * mesh.bounding_diagonal();
    let mut g = c.benchmark_group("distortion_field");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| DistortionField::compute(black_box(&mesh), radius, exec).unwrap())
        });
    }
    g.finish();
}

fn harmonic(c: &mut Criterion) {
    let mesh = fixtures::cylinder(10.0, 40.0, 64, 40, true);
    let n = mesh.num_vertices() as u32;
    let mut g = c.benchmark_group("harmonic_field");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| harmonic_field(black_box(&mesh), &[0], &[n - 1], exec).unwrap())
        });
    }
    g.finish();
}

fn region(c: &mut Criterion) {
    let mesh = fixtures::cylinder(5.0, 40.0, 16, 10, true);
    let mut g = c.benchmark_group("infer_region");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                infer_region(&mesh, Point::new(0.0, 5.0, 20.0), &RegionConfig::default(), &CancelToken::new(), exec)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn texture(c: &mut Criterion) {
    let s = fixtures::study_surfaces().into_iter().find(|s| s.name == "sphere").unwrap();
    let mesh = &s.mesh;
    let region = SurfaceRegion::whole(mesh);
    let map = SurfaceMap::new(mesh).unwrap();
    let element = TextureElement::circle(1.5, 0.05);
    let (face, bary, _) = closest_face(mesh, &s.cursor, Execution::Sequential).unwrap();
    let base = Placement::new(SurfacePoint { face, bary }, 0.0, 1.0).unwrap();
    let ex = Expander {
        map: &map,
        footprint: element.outer.clone(),
        config: PatternConfig::default(),
        exec: Execution::default(),
    };
    let seed = RepetitionSeed::from_base(ElementId(0), base, Vec2::new(5.0, 0.0));
    let sug = extrapolate_lattice(&ex, &seed, Some(Vec2::new(0.0, 5.0)), Some([3, 3]))
        .unwrap()
        .accept()
        .unwrap();
    let style = TextureStyle::raised(1.0).unwrap();
    let mut g = c.benchmark_group("apply_pattern_3x3_sphere");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| apply_pattern(mesh, &region, &sug, &element, &style, &TextureConfig::default(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, distortion, harmonic, region, texture);
criterion_main!(benches);

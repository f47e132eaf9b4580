use knurl_core::config::TextureConfig;
use knurl_core::fixtures::{box_mesh, cylinder};
use knurl_core::mesh::{check_watertight, signed_volume};
use knurl_core::region::{closest_face, SurfaceRegion};
use knurl_core::surface_map::{Placement, SurfacePoint, Vec2};
use knurl_core::texture::{
    embed_texture, texture_placements, ElementSource, TextureElement, TextureError, TextureStyle,
};
use knurl_core::{Execution, Point, TriangleMesh};
use std::collections::HashSet;
use std::f64::consts::PI;

fn plate() -> TriangleMesh {
    box_mesh([10.0, 10.0, 1.0], [1, 1, 1])
}

fn place(mesh: &TriangleMesh, p: Point) -> Placement {
    let (face, bary, _) = closest_face(mesh, &p, Execution::Sequential).unwrap();
    Placement::new(SurfacePoint { face, bary }, 0.0, 1.0).unwrap()
}

fn top(mesh: &TriangleMesh, x: f64, y: f64) -> Placement {
    place(mesh, Point::new(x, y, 1.0))
}

fn volume(m: &TriangleMesh) -> f64 {
    signed_volume(m).unwrap()
}

fn square_with_hole() -> TextureElement {
    let hole = TextureElement::square(2.0).outer;
    TextureElement::new(TextureElement::square(4.0).outer, vec![hole], ElementSource::Sketch).unwrap()
}

fn run(mesh: &TriangleMesh, placements: &[Placement], e: &TextureElement, style: TextureStyle) -> Result<TriangleMesh, TextureError> {
    let region = SurfaceRegion::whole(mesh);
    texture_placements(mesh, &region, placements, e, &style, &TextureConfig::default(), Execution::default())
}

#[test]
fn embedding_keeps_the_plate_closed_and_its_volume() {
    let mesh = plate();
    let region = SurfaceRegion::whole(&mesh);
    let e = TextureElement::square(2.0);
    let emb = embed_texture(&mesh, &region, &[top(&mesh, 5.0, 5.0)], &e, &TextureConfig::default(), Execution::default()).unwrap();
    assert!(check_watertight(&emb.mesh).is_watertight());
    assert!(emb.mesh.num_faces() > mesh.num_faces());
    assert!((volume(&emb.mesh) - volume(&mesh)).abs() < 1e-9);

    // every outline corner is a mesh vertex and every loop edge a mesh edge
    let edges: HashSet<(u32, u32)> = emb
        .mesh
        .faces()
        .iter()
        .flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
        .collect();
    let feat = &emb.features[0];
    for l in &feat.loops {
        for k in 0..l.len() {
            assert!(edges.contains(&(l[k], l[(k + 1) % l.len()])));
        }
    }
    for c in &e.outer {
        let want = Point::new(5.0 + c.x, 5.0 + c.y, 1.0);
        assert!(feat.loops[0].iter().any(|&v| (emb.mesh.vertex(v as usize) - want).norm() < 1e-9));
    }
}

#[test]
fn loop_edges_follow_the_outline() {
    let mesh = box_mesh([10.0, 10.0, 1.0], [7, 7, 1]);
    let region = SurfaceRegion::whole(&mesh);
    let e = TextureElement::circle(2.0, 0.05);
    let emb = embed_texture(&mesh, &region, &[top(&mesh, 5.0, 5.0)], &e, &TextureConfig::default(), Execution::default()).unwrap();
    assert!(check_watertight(&emb.mesh).is_watertight());
    let outline: Vec<(Vec2, Vec2)> = e
        .segments()
        .into_iter()
        .map(|(_, a, b)| (a + Vec2::new(5.0, 5.0), b + Vec2::new(5.0, 5.0)))
        .collect();
    // every loop vertex lies on some outline segment
    for &v in &emb.features[0].loops[0] {
        let p = emb.mesh.vertex(v as usize);
        let q = Vec2::new(p.x, p.y);
        let d = outline
            .iter()
            .map(|&(a, b)| {
                let t = ((q - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
                (a + (b - a) * t - q).norm()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9, "loop vertex {v} is {d} off the outline");
    }
}

#[test]
fn embedding_is_local() {
    let mesh = box_mesh([10.0, 10.0, 1.0], [10, 10, 1]);
    let region = SurfaceRegion::whole(&mesh);
    let emb = embed_texture(
        &mesh,
        &region,
        &[top(&mesh, 5.0, 5.0)],
        &TextureElement::circle(1.5, 0.05),
        &TextureConfig::default(),
        Execution::default(),
    )
    .unwrap();
    let out: HashSet<[u64; 3]> = emb
        .mesh
        .vertices()
        .iter()
        .map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
        .collect();
    // one ring of 1 mm cells beyond the footprint radius
    for p in mesh.vertices() {
        let r = ((p.x - 5.0).powi(2) + (p.y - 5.0).powi(2)).sqrt();
        if p.z < 1.0 || r > 1.5 + 1.5 {
            assert!(out.contains(&[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]), "vertex {p} moved");
        }
    }
}

#[test]
fn zero_placements_return_the_mesh() {
    let mesh = plate();
    let region = SurfaceRegion::whole(&mesh);
    let emb = embed_texture(&mesh, &region, &[], &TextureElement::square(1.0), &TextureConfig::default(), Execution::default()).unwrap();
    assert_eq!(emb.mesh, mesh);
    let out = run(&mesh, &[], &TextureElement::square(1.0), TextureStyle::raised(1.0).unwrap()).unwrap();
    assert_eq!(out, mesh);
}

#[test]
fn overlapping_circles_are_rejected() {
    let mesh = plate();
    let e = TextureElement::circle(2.0, 0.05);
    let err = run(&mesh, &[top(&mesh, 4.0, 5.0), top(&mesh, 6.5, 5.0)], &e, TextureStyle::raised(1.0).unwrap())
        .unwrap_err();
    assert_eq!(err, TextureError::Overlap { first: 0, second: 1 });
    // one circle inside another
    let small = TextureElement::circle(0.5, 0.05);
    let err = run(&mesh, &[top(&mesh, 5.0, 5.0), top(&mesh, 5.0, 5.0)], &small, TextureStyle::raised(1.0).unwrap())
        .unwrap_err();
    assert_eq!(err, TextureError::Overlap { first: 0, second: 1 });
}

#[test]
fn raised_circle_volume() {
    let mesh = plate();
    let out = run(&mesh, &[top(&mesh, 5.0, 5.0)], &TextureElement::circle(2.0, 0.05), TextureStyle::raised(1.0).unwrap())
        .unwrap();
    assert!(check_watertight(&out).is_watertight());
    let dv = volume(&out) - volume(&mesh);
    let want = 4.0 * PI;
    assert!((dv - want).abs() / want < 0.02, "dv = {dv}");
}

#[test]
fn recessed_square_volume_is_exact() {
    let mesh = plate();
    let out = run(&mesh, &[top(&mesh, 5.0, 5.0)], &TextureElement::square(2.0), TextureStyle::recessed(0.5).unwrap())
        .unwrap();
    assert!(check_watertight(&out).is_watertight());
    let dv = volume(&out) - volume(&mesh);
    assert!((dv + 2.0).abs() < 1e-6, "dv = {dv}");
}

#[test]
fn deltas_add_up_over_placements() {
    let mesh = box_mesh([20.0, 10.0, 2.0], [4, 2, 1]);
    let placements: Vec<Placement> = (0..3).map(|i| place(&mesh, Point::new(4.0 + 6.0 * i as f64, 5.0, 2.0))).collect();
    let out = run(&mesh, &placements, &square_with_hole(), TextureStyle::raised(0.7).unwrap()).unwrap();
    assert!(check_watertight(&out).is_watertight());
    let dv = volume(&out) - volume(&mesh);
    assert!((dv - 3.0 * 12.0 * 0.7).abs() < 1e-6, "dv = {dv}");
}

#[test]
fn hollow_leaves_a_closed_cavity() {
    let mesh = plate();
    let (h, t) = (2.0, 0.8);
    let out = run(&mesh, &[top(&mesh, 5.0, 5.0)], &TextureElement::square(4.0), TextureStyle::hollow(h, t).unwrap())
        .unwrap();
    assert!(check_watertight(&out).is_watertight());
    let dv = volume(&out) - volume(&mesh);
    let inner = 4.0 - 2.0 * t;
    let want = 16.0 * h - inner * inner * (h - t);
    assert!((dv - want).abs() < 1e-6, "dv = {dv}, want {want}");
}

#[test]
fn recess_deeper_than_the_plate_fails() {
    let mesh = plate();
    let err = run(&mesh, &[top(&mesh, 5.0, 5.0)], &TextureElement::square(2.0), TextureStyle::recessed(1.5).unwrap())
        .unwrap_err();
    match err {
        TextureError::RecessTooDeep { placement, available, .. } => {
            assert_eq!(placement, 0);
            assert!((available - 1.0).abs() < 1e-9);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn footprint_past_the_edge_does_not_fit() {
    let mesh = plate();
    let err = run(&mesh, &[top(&mesh, 0.5, 5.0)], &TextureElement::square(2.0), TextureStyle::raised(1.0).unwrap())
        .unwrap_err();
    assert!(matches!(err, TextureError::NotFit { placement: 0, .. }), "{err:?}");
}

#[test]
fn raised_circle_on_a_cylinder_side() {
    let mesh = cylinder(10.0, 20.0, 64, 10, true);
    let p = place(&mesh, Point::new(10.0, 0.3, 10.0));
    for style in [TextureStyle::raised(1.0).unwrap(), TextureStyle::recessed(1.0).unwrap()] {
        let out = run(&mesh, &[p], &TextureElement::circle(2.0, 0.05), style).unwrap();
        assert!(check_watertight(&out).is_watertight());
        let dv = volume(&out) - volume(&mesh);
        assert!(dv.signum() == if style.kind == knurl_core::texture::StyleKind::Raised { 1.0 } else { -1.0 });
    }
}


/// Distance from `p` to the closest point of `mesh`.
fn distance_to(mesh: &TriangleMesh, p: &Point) -> f64 {
    closest_face(mesh, p, Execution::Sequential).unwrap().2
}

/// Connected components (over shared edges) of faces lying entirely more
/// than `h / 2` away from the original surface.
fn feature_count(before: &TriangleMesh, after: &TriangleMesh, h: f64) -> usize {
    let original: HashSet<[u64; 3]> = before.vertices().iter().map(|p| [p.x, p.y, p.z].map(f64::to_bits)).collect();
    let lifted: Vec<bool> = after
        .vertices()
        .iter()
        .map(|p| !original.contains(&[p.x, p.y, p.z].map(f64::to_bits)) && distance_to(before, p) > h / 2.0)
        .collect();
    let faces: Vec<usize> = (0..after.num_faces()).filter(|&f| after.face(f).iter().all(|&v| lifted[v as usize])).collect();
    let mut by_edge: std::collections::HashMap<(u32, u32), Vec<usize>> = Default::default();
    for (i, &f) in faces.iter().enumerate() {
        let t = after.face(f);
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut parent: Vec<usize> = (0..faces.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for group in by_edge.values() {
        for w in group.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    (0..faces.len()).filter(|&i| find(&mut parent, i) == i).count()
}

#[test]
fn grid_matrix_is_watertight_with_nine_features() {
    use knurl_core::config::{PatternConfig, RegionConfig};
    use knurl_core::pattern::{extrapolate_lattice, ElementId, Expander, RepetitionSeed};
    use knurl_core::region::{infer_region, CancelToken};
    use knurl_core::surface_map::SurfaceMap;
    use knurl_core::texture::apply_pattern;

    let elements = [
        TextureElement::circle(1.5, 0.05),
        TextureElement::square(3.0),
        square_with_hole(),
    ];
    for s in knurl_core::fixtures::study_surfaces() {
        let mesh = &s.mesh;
        let region = match &s.region {
            Some(faces) => SurfaceRegion::from_faces(mesh, &mesh.topology(), faces.iter().copied()),
            None => infer_region(mesh, s.cursor, &RegionConfig::default(), &CancelToken::new(), Execution::default()).unwrap(),
        };
        let map = SurfaceMap::new(mesh).unwrap().with_region(&region);
        let base = place(mesh, s.cursor);
        for e in &elements {
            let ex = Expander {
                map: &map,
                footprint: e.outer.clone(),
                config: PatternConfig::default(),
                exec: Execution::default(),
            };
            let seed = RepetitionSeed::from_base(ElementId(0), base, Vec2::new(5.0, 0.0));
            let sug = extrapolate_lattice(&ex, &seed, Some(Vec2::new(0.0, 5.0)), Some([3, 3]))
                .unwrap()
                .accept()
                .unwrap();
            assert_eq!(sug.expanded.len(), 9, "{}", s.name);
            for style in [TextureStyle::raised(1.0).unwrap(), TextureStyle::recessed(0.8).unwrap()] {
                let out = apply_pattern(mesh, &region, &sug, e, &style, &TextureConfig::default(), Execution::default())
                    .unwrap_or_else(|err| panic!("{} {:?}: {err}", s.name, style.kind));
                assert!(check_watertight(&out).is_watertight(), "{} {:?}", s.name, style.kind);
                assert_eq!(feature_count(mesh, &out, style.height), 9, "{} {:?}", s.name, style.kind);
                assert!(volume(&out) > 0.0);
            }
        }
    }
}

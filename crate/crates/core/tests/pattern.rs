use knurl_core::config::PatternConfig;
use knurl_core::fixtures;
use knurl_core::mesh::TriangleMesh;
use knurl_core::pattern::{
    adjust_suggestion, detect_repetition, extrapolate_lattice, extrapolate_path, record_placement, respond_to_paste, ElementId,
    Expander, HistoryEntry, OpKind, PasteResponse, PatternError, PlacementHistory, RepetitionSeed, SuggestionEdits,
};
use knurl_core::region::{closest_face, SurfaceRegion};
use knurl_core::surface_map::{Placement, SurfaceMap, SurfacePoint, Vec2};
use knurl_core::{Execution, Point};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::f64::consts::{PI, TAU};

fn disc(r: f64, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

fn at(mesh: &TriangleMesh, x: f64, y: f64) -> Placement {
    let (f, b, d) = closest_face(mesh, &Point::new(x, y, 0.0), Execution::Sequential).unwrap();
    assert!(d < 1e-12);
    Placement::new(SurfacePoint::new_clamped(f, b), 0.0, 1.0).unwrap()
}

fn seed(mesh: &TriangleMesh, map: &SurfaceMap, base: (f64, f64), step: (f64, f64)) -> RepetitionSeed {
    let entry = |p, kind, t| HistoryEntry {
        placement: p,
        element: ElementId(0),
        kind,
        timestamp: t,
    };
    let h = record_placement(&PlacementHistory::new(), entry(at(mesh, base.0, base.1), OpKind::Manual, 0)).unwrap();
    let h = record_placement(&h, entry(at(mesh, base.0 + step.0, base.1 + step.1), OpKind::Paste, 1)).unwrap();
    detect_repetition(&h, map).unwrap()
}

fn expander<'m, 'a>(map: &'m SurfaceMap<'a>, footprint: Vec<Vec2>) -> Expander<'m, 'a> {
    Expander {
        map,
        footprint,
        config: PatternConfig {
            max_placements: 100_000,
            ..PatternConfig::default()
        },
        exec: Execution::default(),
    }
}

fn xy(map: &SurfaceMap, p: &Placement) -> (f64, f64) {
    let q = map.position(&p.anchor);
    (q.x, q.y)
}

#[test]
fn one_row_on_a_flat_square() {
    let m = fixtures::grid_plane(20.0, 20.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(1.0, 32));
    let s = seed(&m, &map, (2.0, 2.0), (5.0, 0.0));
    let row = extrapolate_lattice(&ex, &s, None, None).unwrap();
    let xs: Vec<f64> = row.expanded.iter().map(|p| xy(&map, p).0).collect();
    assert_eq!(xs.len(), 4);
    for (x, want) in xs.iter().zip([2.0, 7.0, 12.0, 17.0]) {
        assert!((x - want).abs() < 1e-9, "{xs:?}");
    }
    let grid = extrapolate_lattice(&ex, &s, Some(Vec2::new(0.0, 5.0)), None).unwrap();
    assert_eq!(grid.expanded.len(), 16);
    // the demonstrations open the list, untouched
    assert_eq!(grid.expanded[0], s.demos[0].placement);
    assert_eq!(grid.expanded[1], s.demos[1].placement);
}

#[test]
fn too_long_a_step_is_an_error() {
    let m = fixtures::grid_plane(20.0, 20.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(1.0, 32));
    let mut s = seed(&m, &map, (2.0, 2.0), (5.0, 0.0));
    s.step = Vec2::new(25.0, 0.0);
    s.demos.truncate(1);
    assert_eq!(extrapolate_lattice(&ex, &s, None, None), Err(PatternError::RegionTooSmall));
    let s = seed(&m, &map, (2.0, 2.0), (5.0, 0.0));
    assert_eq!(
        extrapolate_lattice(&ex, &s, Some(Vec2::new(10.0, 0.0)), None),
        Err(PatternError::DependentSteps)
    );
}

/// All lattice points `(i, j) >= 0` whose disc outline lies in the
/// rectangle, by direct enumeration.
fn brute_force(w: f64, h: f64, base: Vec2, u: Vec2, v: Vec2, outline: &[Vec2]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for j in 0..400 {
        for i in 0..400 {
            let c = base + u * i as f64 + v * j as f64;
            if outline.iter().all(|o| {
                let p = c + o;
                (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y)
            }) {
                out.push((c.x, c.y));
            }
        }
    }
    out
}

fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

#[test]
fn lattice_matches_brute_force_on_random_rectangles() {
    let mut rng = StdRng::seed_from_u64(0x6b6e75726c);
    let mut with_error = 0;
    for case in 0..50 {
        let w = rng.random_range(8.0..30.0);
        let h = rng.random_range(8.0..30.0);
        let m = fixtures::grid_plane(w, h, 6, 6);
        let map = SurfaceMap::new(&m).unwrap();
        let r = rng.random_range(0.3..2.0);
        let outline = disc(r, 24);
        let ex = expander(&map, outline.clone());
        // base in the lower-left half, steps leaning right and up, so most
        // cases have a real lattice to compare
        let base = Vec2::new(rng.random_range(r..w / 2.0), rng.random_range(r..h / 2.0));
        let len = rng.random_range(2.0 * r + 0.3..8.0);
        let a = rng.random_range(-PI / 4.0..PI / 4.0);
        let u = Vec2::new(len * a.cos(), len * a.sin());
        let b = a + rng.random_range(PI / 6.0..5.0 * PI / 6.0);
        let len2 = rng.random_range(2.0 * r + 0.3..8.0);
        let v = Vec2::new(len2 * b.cos(), len2 * b.sin());

        let oracle = brute_force(w, h, base, u, v, &outline);
        let second = base + u;
        let second_inside = outline.iter().all(|o| {
            let p = second + o;
            (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y)
        });
        if !second_inside {
            // the pasted copy cannot even be made; the lattice needs a
            // reachable first step
            with_error += 1;
            let s = RepetitionSeed {
                element: ElementId(0),
                base: at(&m, base.x, base.y),
                step: u,
                demos: vec![knurl_core::pattern::Demo {
                    index: [0, 0],
                    placement: at(&m, base.x, base.y),
                }],
            };
            assert_eq!(extrapolate_lattice(&ex, &s, Some(v), None), Err(PatternError::RegionTooSmall), "case {case}");
            continue;
        }
        let s = seed(&m, &map, (base.x, base.y), (u.x, u.y));
        assert!((s.step - u).norm() < 1e-9);
        let got = extrapolate_lattice(&ex, &s, Some(v), None);
        let needs_v = {
            let c = base + v;
            outline.iter().all(|o| {
                let p = c + o;
                (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y)
            })
        };
        if !needs_v {
            with_error += 1;
            assert_eq!(got, Err(PatternError::RegionTooSmall), "case {case}");
            continue;
        }
        let got = sorted(got.unwrap().expanded.iter().map(|p| xy(&map, p)).collect());
        let want = sorted(oracle);
        assert_eq!(got.len(), want.len(), "case {case}");
        for (g, o) in got.iter().zip(&want) {
            assert!((g.0 - o.0).abs() < 1e-9 && (g.1 - o.1).abs() < 1e-9, "case {case}: {g:?} vs {o:?}");
        }
    }
    assert!(with_error < 25, "too few informative cases");
}

#[test]
fn shrinking_the_region_never_adds_placements() {
    let m = fixtures::grid_plane(24.0, 24.0, 24, 24);
    let topo = m.topology();
    let mut last = usize::MAX;
    for size in [24.0, 20.0, 16.0, 12.0] {
        let region = SurfaceRegion::from_faces(
            &m,
            &topo,
            (0..m.num_faces() as u32).filter(|&f| {
                let c = m.face_centroid(f as usize);
                c.x < size && c.y < size
            }),
        );
        let map = SurfaceMap::new(&m).unwrap().with_region(&region);
        let ex = expander(&map, disc(1.0, 16));
        let s = seed(&m, &map, (1.5, 1.5), (3.5, 0.5));
        let n = extrapolate_lattice(&ex, &s, Some(Vec2::new(-0.3, 3.5)), None)
            .unwrap()
            .expanded
            .len();
        assert!(n <= last, "size {size}: {n} > {last}");
        last = n;
    }
}

#[test]
fn counts_cap_the_lattice() {
    let m = fixtures::grid_plane(30.0, 30.0, 15, 15);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(1.0, 16));
    let s = seed(&m, &map, (5.0, 5.0), (5.0, 0.0));
    let g = extrapolate_lattice(&ex, &s, Some(Vec2::new(0.0, 5.0)), Some([3, 3])).unwrap();
    assert_eq!(g.expanded.len(), 9);
}

#[test]
fn straight_and_short_strokes() {
    let m = fixtures::grid_plane(20.0, 20.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(0.5, 12));
    let s = seed(&m, &map, (3.0, 3.0), (2.0, 0.0));
    let stroke = [at(&m, 5.0, 5.0).anchor, at(&m, 15.0, 5.0).anchor];
    let path = extrapolate_path(&ex, &s, &stroke).unwrap();
    let xs: Vec<f64> = path.expanded.iter().map(|p| xy(&map, p).0).collect();
    assert_eq!(xs.len(), 6);
    for (k, x) in xs.iter().enumerate() {
        assert!((x - (5.0 + 2.0 * k as f64)).abs() < 1e-9);
    }
    assert!(path.expanded.iter().all(|p| p.rotation.abs() < 1e-12));

    let short = [at(&m, 5.0, 5.0).anchor, at(&m, 6.5, 5.0).anchor];
    assert_eq!(extrapolate_path(&ex, &s, &short).unwrap().expanded.len(), 1);
    let dot = [at(&m, 5.0, 5.0).anchor, at(&m, 5.0, 5.0).anchor];
    assert_eq!(extrapolate_path(&ex, &s, &dot), Err(PatternError::EmptyStroke));
}

#[test]
fn circular_stroke_turns_by_an_eighth() {
    let m = fixtures::grid_plane(20.0, 20.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(0.5, 12));
    let n = 64;
    let stroke: Vec<SurfacePoint> = (0..=n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            at(&m, 10.0 + 6.0 * t.cos(), 10.0 + 6.0 * t.sin()).anchor
        })
        .collect();
    let circumference = n as f64 * 2.0 * 6.0 * (PI / n as f64).sin();
    let mut s = seed(&m, &map, (3.0, 3.0), (2.0, 0.0));
    s.step = Vec2::new(circumference / 8.0, 0.0);
    let path = extrapolate_path(&ex, &s, &stroke).unwrap();
    assert_eq!(path.expanded.len(), 8);
    // analytic tangent of the polygonal circle at vertex 8k: the outgoing
    // chord direction
    for (k, p) in path.expanded.iter().enumerate() {
        let want = (PI / 2.0 + PI / n as f64 + k as f64 * PI / 4.0).rem_euclid(TAU);
        let diff = (p.rotation - want).rem_euclid(TAU);
        assert!(diff.min(TAU - diff) < 1e-9, "placement {k}: {} vs {want}", p.rotation);
    }
}

#[test]
fn adjusting_a_row() {
    let m = fixtures::grid_plane(20.0, 20.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(1.0, 32));
    let s = seed(&m, &map, (2.0, 2.0), (5.0, 0.0));
    let row = extrapolate_lattice(&ex, &s, None, None).unwrap();
    let wide = adjust_suggestion(
        &ex,
        &row,
        &SuggestionEdits {
            u_step: Some(Vec2::new(10.0, 0.0)),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(wide.expanded.len(), 2);
    assert_eq!(wide.expanded[0], row.expanded[0]);
    assert_eq!(adjust_suggestion(&ex, &row, &SuggestionEdits::default()).unwrap(), row);
    assert!(matches!(
        adjust_suggestion(
            &ex,
            &row,
            &SuggestionEdits {
                spacing: Some(0.0),
                ..Default::default()
            }
        ),
        Err(PatternError::InvalidEdit(_))
    ));
    let spaced = adjust_suggestion(
        &ex,
        &row,
        &SuggestionEdits {
            spacing: Some(10.0),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(spaced.expanded, wide.expanded);
    let mut done = row.clone();
    done.status = knurl_core::pattern::SuggestionStatus::Dismissed;
    assert!(matches!(
        adjust_suggestion(&ex, &done, &SuggestionEdits::default()),
        Err(PatternError::NotPending(_))
    ));
}

#[test]
fn pastes_extend_then_upgrade() {
    let m = fixtures::grid_plane(30.0, 30.0, 10, 10);
    let map = SurfaceMap::new(&m).unwrap();
    let ex = expander(&map, disc(1.0, 16));
    let entry = |x, y, kind, t| HistoryEntry {
        placement: at(&m, x, y),
        element: ElementId(0),
        kind,
        timestamp: t,
    };
    let h = record_placement(&PlacementHistory::new(), entry(5.0, 5.0, OpKind::Manual, 0)).unwrap();
    assert_eq!(respond_to_paste(None, &h, &map, 0.01), PasteResponse::Nothing);
    let h = record_placement(&h, entry(10.0, 5.0, OpKind::Paste, 1)).unwrap();
    let PasteResponse::New(seed) = respond_to_paste(None, &h, &map, 0.01) else {
        panic!("expected a seed")
    };
    let row = extrapolate_lattice(&ex, &seed, None, Some([3, 1])).unwrap();
    let h = record_placement(&h, entry(15.0, 5.0, OpKind::Paste, 2)).unwrap();
    assert_eq!(respond_to_paste(Some(&row), &h, &map, 0.01), PasteResponse::Consistent);
    let h = record_placement(&h, entry(10.0, 10.0, OpKind::Paste, 3)).unwrap();
    let PasteResponse::Upgrade { seed, v_step } = respond_to_paste(Some(&row), &h, &map, 0.01) else {
        panic!("expected an upgrade")
    };
    assert!((v_step - Vec2::new(0.0, 5.0)).norm() < 1e-9);
    let grid = extrapolate_lattice(&ex, &seed, Some(v_step), Some([3, 3])).unwrap();
    assert_eq!(grid.expanded.len(), 9);
    assert_eq!(grid.expanded[2], h.entries()[3].placement);
}

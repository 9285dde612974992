use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_6, FRAC_PI_8, PI};
use std::sync::OnceLock;

use adscurv::conemetric::*;
use adscurv::fuchsian::{genus2_octagon_group, FuchsianGroup};
use adscurv::hyp2::{comparison_triangle, h2_distance, place_triangle, H2Point};
use adscurv::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn group() -> &'static FuchsianGroup {
    static G: OnceLock<FuchsianGroup> = OnceLock::new();
    G.get_or_init(genus2_octagon_group)
}

fn hyperbolic() -> ScaledHyperbolic {
    ScaledHyperbolic::hyperbolic(group().clone()).unwrap()
}

fn constant() -> ScaledHyperbolic {
    ScaledHyperbolic::constant_height(group().clone(), FRAC_PI_6).unwrap()
}

/// The regular octagon fan with all corners identified, written out by hand.
fn octagon_fan() -> MetricTriangulation {
    let cot = 1.0 / FRAC_PI_8.tan();
    let spoke = (cot * cot).acosh();
    let side = 2.0 * cot.acosh();
    let tris = vec![[0, 1, 1]; 8];
    let sides = (0..8).map(|k| [(k, true), (8 + k % 4, k < 4), ((k + 1) % 8, false)]).collect();
    let mut lengths = vec![spoke; 8];
    lengths.extend([side; 4]);
    MetricTriangulation::new(2, 2, tris, sides, lengths, 3.1).unwrap()
}

/// `n` equilateral triangles with `cosh(side) = 3` around vertex 0.
fn equilateral_fan(n: usize) -> MetricTriangulation {
    let l = 3f64.acosh();
    let tris: Vec<[usize; 3]> = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
    let mut lengths = BTreeMap::new();
    for k in 0..n {
        lengths.insert((0, 1 + k), l);
        let (a, b) = (1 + k, 1 + (k + 1) % n);
        lengths.insert((a.min(b), a.max(b)), l);
    }
    MetricTriangulation::from_pairs(0, n + 1, tris, &lengths, 2.0).unwrap()
}

fn tetrahedron(side: f64) -> MetricTriangulation {
    let tris = vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
    let lengths: BTreeMap<(usize, usize), f64> =
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].into_iter().map(|k| (k, side)).collect();
    MetricTriangulation::from_pairs(0, 4, tris, &lengths, 1.0).unwrap()
}

#[test]
fn octagon_fan_reproduces_the_smooth_surface() {
    let cs = build_cone_surface(&octagon_fan()).unwrap();
    for &theta in cs.cone_angles() {
        assert!((theta - 2.0 * PI).abs() < 1e-10, "{theta}");
    }
    // each fan triangle has angle pi/4 at the center, area pi/2
    for t in 0..8 {
        assert!((cs.shapes()[t].alpha - PI / 4.0).abs() < 1e-12);
        assert!((cs.area(t) + cs.excess(t)).abs() < 1e-10);
        assert!((cs.area(t) - PI / 2.0).abs() < 1e-10);
    }
    assert!(cone_angle_check(&cs).pass);
    let ex = excess_budget(&cs).unwrap();
    assert!((ex.total_excess + 4.0 * PI).abs() < 1e-10);
    assert!(ex.euler_identity_residual.abs() < 1e-10);
    assert!(ex.pass);
    // several edges join the same two vertices, so the pair-keyed JSON form is refused
    assert!(matches!(octagon_fan().to_json(), Err(Error::BadCombinatorics(_))));
}

#[test]
fn equilateral_fans_around_a_vertex() {
    let nine = build_cone_surface(&equilateral_fan(9)).unwrap();
    let expected = 9.0 * 0.75f64.acos();
    assert!((nine.cone_angles()[0] - expected).abs() < 1e-12);
    assert!((expected - 6.5046).abs() < 1e-4);
    let rep = cone_angle_check(&nine);
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.min_angle, nine.cone_angles()[0]);
    // a surface with boundary has no excess budget
    assert!(excess_budget(&nine).is_err());

    let six = build_cone_surface(&equilateral_fan(6)).unwrap();
    let rep = cone_angle_check(&six);
    assert!(!rep.pass);
    assert_eq!(rep.violators.len(), 1);
    assert!((rep.violators[0].1 - 4.3364).abs() < 1e-4, "{:?}", rep.violators);
}

#[test]
fn invalid_inputs_are_rejected() {
    let mut lengths = BTreeMap::new();
    lengths.insert((0, 1), 1.0);
    lengths.insert((1, 2), 1.0);
    lengths.insert((0, 2), 2.5);
    let mt = MetricTriangulation::from_pairs(0, 3, vec![[0, 1, 2]], &lengths, 3.0).unwrap();
    assert!(matches!(build_cone_surface(&mt), Err(Error::BadTriangle { index: 0 })));

    // wrong genus for the Euler relation
    let tris = vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
    let lengths: BTreeMap<(usize, usize), f64> =
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].into_iter().map(|k| (k, 1.0)).collect();
    assert!(matches!(
        MetricTriangulation::from_pairs(2, 4, tris.clone(), &lengths, 1.0),
        Err(Error::BadCombinatorics(_))
    ));
    // diameter bound
    assert!(matches!(
        MetricTriangulation::from_pairs(0, 4, tris, &lengths, 0.5),
        Err(Error::OutOfRange { name: "triangle diameter", .. })
    ));
    // two triangles gluing an edge with the same orientation
    let bad = MetricTriangulation::new(0, 3, vec![[0, 1, 2], [0, 1, 2]], vec![[(0, true), (1, true), (2, true)]; 2], vec![1.0; 3], 2.0);
    assert!(matches!(bad, Err(Error::BadCombinatorics(_))));
}

#[test]
fn sphere_combinatorics_fail_the_excess_budget() {
    let cs = build_cone_surface(&tetrahedron(1.0)).unwrap();
    let ex = excess_budget(&cs).unwrap();
    assert!(ex.total_excess < 0.0 && ex.bound == 4.0 * PI);
    assert!(!ex.pass);
    assert!(ex.euler_identity_residual.abs() < 1e-10);
    assert!(!cone_angle_check(&cs).pass);
}

#[test]
fn quotient_triangulations_of_the_hyperbolic_surface() {
    let src = hyperbolic();
    let qt = triangulate_quotient(&src, 0.5).unwrap();
    let mt = qt.triangulation();
    assert!(mt.max_edge() < 0.5);
    assert_eq!(mt.genus(), 2);
    assert!(mt.is_closed());
    let (t, e, v) = (mt.triangles().len() as i64, mt.edge_count() as i64, mt.vertex_count() as i64);
    assert_eq!(t - e + v, -2);
    assert_eq!(2 * e, 3 * t);

    let cs = build_cone_surface(mt).unwrap();
    let worst = cs.cone_angles().iter().map(|a| (a - 2.0 * PI).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
    assert!((cs.total_excess() + 4.0 * PI).abs() < 1e-8);
    assert!(cs.identity_residual().abs() < 1e-8);

    // halving epsilon adds one subdivision level
    let finer = triangulate_quotient(&src, 0.25).unwrap();
    assert_eq!(finer.levels(), qt.levels() + 1);
    assert_eq!(finer.triangulation().triangles().len(), 4 * mt.triangles().len());

    // every side of every lift has its edge's length, and the two lifts of
    // each edge differ by a group element
    let lifts = qt.triangle_lifts();
    let mut first_use: Vec<Option<(H2Point, H2Point)>> = vec![None; mt.edge_count()];
    for (t, sides) in mt.sides().iter().enumerate() {
        for (i, &(e, fwd)) in sides.iter().enumerate() {
            let (p, q) = (lifts[t][i], lifts[t][(i + 1) % 3]);
            assert!((h2_distance(&p, &q) - mt.edge_lengths()[e]).abs() < 1e-10);
            let (s, f) = if fwd { (p, q) } else { (q, p) };
            match first_use[e] {
                None => first_use[e] = Some((s, f)),
                Some((s0, f0)) => {
                    let g = group();
                    assert!(g.quotient_h2_distance(&s, &s0).unwrap() < 1e-8);
                    assert!(g.quotient_h2_distance(&f, &f0).unwrap() < 1e-8);
                    assert!(g.quotient_h2_distance(&s.lerp(&f, 0.3), &s0.lerp(&f0, 0.3)).unwrap() < 1e-8);
                }
            }
        }
    }

    // simplicial after subdivision, so the JSON form round-trips
    let json = mt.to_json().unwrap();
    let back = MetricTriangulation::from_json(&json).unwrap();
    assert_eq!(back.triangles(), mt.triangles());
    let cs2 = build_cone_surface(&back).unwrap();
    for (a, b) in cs.cone_angles().iter().zip(cs2.cone_angles()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(matches!(MetricTriangulation::from_json("{\"genus\": 2"), Err(Error::Schema(_))));
    assert!(matches!(MetricTriangulation::from_json(&json.replace("\"genus\"", "\"genre\"")), Err(Error::Schema(_))));
}

#[test]
fn constant_height_triangulation_meets_its_diameter_bound() {
    let src = constant();
    let qt = triangulate_quotient(&src, 0.3).unwrap();
    let audit = qt.diameter_audit(&src, 6);
    println!("diameter audit at eps 0.3: {audit:.6}");
    assert!(audit < 0.3);
    let cs = build_cone_surface(qt.triangulation()).unwrap();
    // shorter sides give smaller comparison angles, so every cone angle grows
    let rep = cone_angle_check(&cs);
    assert!(rep.pass && rep.min_angle > 2.0 * PI, "{rep:?}");
    assert!(cs.identity_residual().abs() < 1e-8);
    assert!(excess_budget(&cs).unwrap().pass);
}

#[test]
fn epsilon_must_stay_below_the_injectivity_estimate() {
    let src = hyperbolic();
    let limit = src.injectivity();
    assert!((limit - 2.0 * (1.0 / FRAC_PI_8.tan()).acosh() / 2.0).abs() < 1e-8);
    assert!(matches!(triangulate_quotient(&src, 1.6), Err(Error::EpsilonTooLarge { .. })));
    assert!(constant().injectivity() < limit);
}

#[test]
fn edges_and_single_triangle_chords_are_exact() {
    let src = hyperbolic();
    let qt = triangulate_quotient(&src, 0.5).unwrap();
    let mt = qt.triangulation();
    let cs = build_cone_surface(mt).unwrap();
    let mut cdf = cone_distance(&cs, 1).unwrap();
    let tri = 17;
    let [a, b, c] = mt.triangles()[tri];
    cdf.compute_sources(&[a, b, c]);
    let [d01, d12, d20] = mt.side_lengths(tri);
    // an edge shorter than the injectivity radius is a shortest path
    assert!((cdf.distance(a, b).unwrap() - d01).abs() < 1e-12);
    assert!((cdf.distance(b, c).unwrap() - d12).abs() < 1e-12);

    // midpoints of the two sides at corner a, against the cosine law
    let alpha = cs.shapes()[tri].alpha;
    let (x, y) = (d01 / 2.0, d20 / 2.0);
    let chord = (x.cosh() * y.cosh() - x.sinh() * y.sinh() * alpha.cos()).acosh();
    let m0 = cdf.steiner_node(mt.sides()[tri][0].0, 1);
    let m2 = cdf.steiner_node(mt.sides()[tri][2].0, 1);
    cdf.compute_sources(&[m0]);
    assert!((cdf.distance(m0, m2).unwrap() - chord).abs() < 1e-10);
}

#[test]
fn cone_distances_form_a_metric_and_improve_under_refinement() {
    let src = hyperbolic();
    let qt = triangulate_quotient(&src, 0.4).unwrap();
    let cs = build_cone_surface(qt.triangulation()).unwrap();
    let mut coarse = cone_distance(&cs, 1).unwrap();
    let mut fine = cone_distance(&cs, 3).unwrap();
    let mut finest = cone_distance(&cs, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let nodes: Vec<usize> = (0..12).map(|_| rng.gen_range(0..qt.triangulation().vertex_count())).collect();
    for f in [&mut coarse, &mut fine, &mut finest] {
        f.compute_sources(&nodes);
    }
    for &p in &nodes {
        assert_eq!(coarse.row(p).unwrap()[p], 0.0);
        for &q in &nodes {
            let (rp, rq) = (coarse.row(p).unwrap(), coarse.row(q).unwrap());
            assert!((rp[q] - rq[p]).abs() < 1e-9);
            for &r in &nodes {
                assert!(rp[r] <= rp[q] + coarse.row(q).unwrap()[r] + 1e-9);
            }
            // 2 divides 4 divides 8: each graph contains the previous one
            assert!(fine.distance(p, q).unwrap() <= coarse.distance(p, q).unwrap() + 1e-9);
            assert!(finest.distance(p, q).unwrap() <= fine.distance(p, q).unwrap() + 1e-9);
        }
    }
    // errors against the exact quotient distance, with a Richardson estimate
    let mut errs = [0.0f64; 3];
    for (k, f) in [&coarse, &fine, &finest].into_iter().enumerate() {
        for &p in &nodes {
            for &q in &nodes {
                let (x, y) = (qt.vertex_points()[p], qt.vertex_points()[q]);
                let exact = src.distance(&x, &y).unwrap();
                let e = f.distance(p, q).unwrap() - exact;
                assert!(e > -1e-9, "graph beat the surface: {e}");
                errs[k] = errs[k].max(e);
            }
        }
    }
    let rate = (errs[0] / errs[1]).log2();
    println!("steiner refinement 1/3/7: max error {:.3e} {:.3e} {:.3e}, observed order {rate:.2}", errs[0], errs[1], errs[2]);
    assert!(errs[2] < errs[1] && errs[1] < errs[0]);
}

#[test]
fn chord_bound_fuzz_has_no_violations() {
    let rep = chord_bound_fuzz(100_000, 2.0, 11);
    assert_eq!(rep.violations, 0);
    assert!(rep.max_ratio <= 1.0 && rep.max_ratio > 0.5, "{rep:?}");
    // the chord formula against explicit placement
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let (x, theta) = (2.0 * rng.gen::<f64>(), PI * rng.gen::<f64>());
        let placed = h2_distance(&H2Point::from_polar(x, 0.3), &H2Point::from_polar(x, 0.3 + theta));
        let l = adscurv::hyp2::isosceles_chord(x, theta);
        assert!((placed - l).abs() < 1e-9 * (1.0 + l), "{placed} {l}");
    }
}

#[test]
fn chord_comparison_on_computable_sources() {
    let tris: Vec<usize> = (0..24).map(|k| 7 * k).collect();
    let src = hyperbolic();
    let qt = triangulate_quotient(&src, 0.4).unwrap();
    let rep = chord_comparison_check(&src, &qt, &tris, 100, 1).unwrap();
    assert!(rep.pass && rep.samples == 2400);
    assert!(rep.min_gap.abs() < 1e-12 && rep.max_bound_ratio < 1e-9, "{rep:?}");

    let src = constant();
    let qt = triangulate_quotient(&src, 0.4).unwrap();
    let rep = chord_comparison_check(&src, &qt, &tris, 100, 1).unwrap();
    println!("chord comparison, u = pi/6: min gap {:.3e}, max gap/bound {:.4}", rep.min_gap, rep.max_bound_ratio);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.min_gap >= -1e-12 && rep.max_bound_ratio > 0.0);
    assert_eq!(rep, chord_comparison_check(&src, &qt, &tris, 100, 1).unwrap());

    // A at O: the comparison point is O' itself, so the gap vanishes
    let lift = qt.triangle_lifts()[3];
    let [d01, d12, d20] = qt.triangulation().side_lengths(3);
    let [o2, _, y2] = place_triangle(d01, d20, d12).unwrap();
    let b = lift[0].lerp(&lift[2], 0.6);
    let gap = h2_distance(&o2, &o2.lerp(&y2, 0.6)) - src.local_distance(&lift[0], &b);
    assert!(gap.abs() < 1e-12, "{gap}");
}

#[test]
fn angle_gaps_for_scaled_sources() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut violations = 0;
    for trial in 0..1000 {
        let scale = if trial == 0 { 1.0 } else { 0.3 + 0.7 * rng.gen::<f64>() };
        let size = 0.05 + 1.5 * rng.gen::<f64>();
        let pts: Vec<H2Point> = (0..3).map(|_| H2Point::from_polar(size * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>())).collect();
        let source = comparison_triangle(h2_distance(&pts[0], &pts[1]), h2_distance(&pts[0], &pts[2]), h2_distance(&pts[1], &pts[2]));
        let Ok(source) = source else { continue };
        let shape = comparison_triangle(
            scale * source.c,
            scale * source.b,
            scale * source.a,
        )
        .unwrap();
        for corner in 0..3 {
            let rep = angle_gap_check(source.angles()[corner], &shape, corner, source.excess());
            if trial == 0 {
                assert!(rep.gap.abs() < 1e-12 && rep.bound.abs() < 1e-12);
            }
            if !rep.pass {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);

    // extrapolated comparison angles recover the exact angle of the source
    let src = constant();
    let (o, x, y) = (H2Point::from_polar(0.3, 1.0), H2Point::from_polar(0.5, 2.0), H2Point::from_polar(0.4, -0.5));
    let exact = src.angle(&o, &x, &y, 0.3).unwrap();
    let approx = extrapolated_angle(&src, &o, &x, &y, 0.3).unwrap();
    assert!((exact - approx).abs() < 1e-6, "{exact} {approx}");
}

#[test]
fn distance_window_on_the_hyperbolic_and_constant_sources() {
    let src = hyperbolic();
    let qt = triangulate_quotient(&src, 0.4).unwrap();
    let cs = build_cone_surface(qt.triangulation()).unwrap();
    let mut cdf = cone_distance(&cs, 1).unwrap();
    let pairs = sample_node_pairs(&cdf, 100, 10, 3);
    let rep = distance_window_check(&src, &qt, &mut cdf, &pairs, 1e-9).unwrap();
    // an isometric source leaves only the graph's path bias
    assert!(rep.pass && rep.min_error > -1e-9 && rep.max_error < 0.1, "{rep:?}");
    assert_eq!(rep.histogram.iter().map(|h| h.2).sum::<usize>(), 100);

    let src = constant();
    let mut last = f64::INFINITY;
    for (eps, m) in [(0.4, 1), (0.2, 2)] {
        let qt = triangulate_quotient(&src, eps).unwrap();
        let cs = build_cone_surface(qt.triangulation()).unwrap();
        let mut cdf = cone_distance(&cs, m).unwrap();
        let pairs = sample_node_pairs(&cdf, 100, 10, 3);
        let rep = distance_window_check(&src, &qt, &mut cdf, &pairs, 1e-9).unwrap();
        println!("distance window at eps {eps}: errors [{:.3e}, {:.3e}], window {:?}", rep.min_error, rep.max_error, rep.window);
        assert!(rep.pass);
        assert!((rep.window.1 - (2.0 * eps + 4.0 * PI * eps.sinh())).abs() < 1e-12);
        assert!(rep.max_abs_error < last);
        last = rep.max_abs_error;
    }
}

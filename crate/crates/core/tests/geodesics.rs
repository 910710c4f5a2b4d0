use cgl_core::geodesics::{
    coalescence_point, curvature_gap, direction_target, geodesic, passages_from,
    transversal_deviation, GeodesicTree,
};
use cgl_core::lattice::is_up_right_path;
use cgl_core::lpp::build_grid;
use cgl_core::weights::{WeightField, Weights};
use cgl_core::Site;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn path_weight_equals_passage_time(
        seed in any::<u64>(),
        a in (1i64..=20, 1i64..=20),
        b in (0i64..=20, 0i64..=20),
    ) {
        let f = WeightField::new(seed);
        let grid = build_grid(&f, 40, 40).unwrap();
        let z = Site::new(a.0, a.1);
        let z2 = z.offset(b.0, b.1);
        let p = geodesic(&grid, z, z2).unwrap();
        prop_assert!(is_up_right_path(&p.sites));
        prop_assert_eq!(p.start(), z);
        prop_assert_eq!(p.end(), z2);
        let sum: f64 = p.sites.iter().map(|&s| f.weight(s)).sum();
        let g = passages_from(&f, z, &[z2]).unwrap()[0];
        prop_assert!((sum - g).abs() <= 1e-9 * g);
        prop_assert!((p.passage - g).abs() <= 1e-9 * g);
    }

    #[test]
    fn tree_branch_equals_backtracked_geodesic(seed in any::<u64>(), i in 1i64..=30, j in 1i64..=30) {
        let grid = build_grid(&WeightField::new(seed), 30, 30).unwrap();
        let tree = GeodesicTree::new(&grid);
        let z = Site::new(i, j);
        prop_assert_eq!(tree.branch(z).unwrap(), geodesic(&grid, Site::ORIGIN, z).unwrap().sites);
    }

    #[test]
    fn shared_site_implies_shared_suffix(seed in any::<u64>(), i in 1i64..=15, j in 1i64..=15) {
        let grid = build_grid(&WeightField::new(seed), 50, 50).unwrap();
        let z = Site::new(i, j);
        let target = Site::new(50, 50);
        // coalescence_point errors out if the suffixes differ
        let c = coalescence_point(&grid, Site::ORIGIN, z, target).unwrap();
        if let Some(c) = c {
            let a = geodesic(&grid, Site::ORIGIN, target).unwrap();
            let b = geodesic(&grid, z, target).unwrap();
            let ka = a.sites.iter().position(|&s| s == c).unwrap();
            let kb = b.sites.iter().position(|&s| s == c).unwrap();
            prop_assert_eq!(&a.sites[ka..], &b.sites[kb..]);
        }
    }
}

#[test]
fn subtree_is_the_set_of_descendants() {
    let grid = build_grid(&WeightField::new(6), 20, 20).unwrap();
    let tree = GeodesicTree::new(&grid);
    let top = Site::new(3, 2);
    let sub = tree.subtree(top).unwrap();
    for (z, _, _) in grid.cells() {
        let through = tree.branch(z).unwrap().contains(&top);
        assert_eq!(through, sub.contains(&z), "{z}");
    }
    assert_eq!(tree.edges().count(), 20 * 20 - 1);
}

#[test]
fn deviation_of_staircase_paths() {
    use cgl_core::geodesics::GeodesicPath;
    let n = 10;
    let mut sites = vec![Site::ORIGIN];
    for k in 1..n {
        sites.push(Site::new(k, k + 1 - 1).offset(1, 0));
        sites.push(Site::new(k + 1, k + 1));
    }
    let path = GeodesicPath {
        sites,
        weight_sum: 0.0,
        passage: 0.0,
    };
    let d = transversal_deviation(&path, Site::new(n, n));
    assert!((d - 2f64.sqrt() / 2.0).abs() < 1e-12, "{d}");
}

#[test]
fn curvature_gap_cases() {
    assert_eq!(curvature_gap((100.0, 100.0), (100.0, 100.0)).unwrap(), 0.0);
    assert_eq!(curvature_gap((9.0, 4.0), (9.0, 0.0)).unwrap(), 12.0);
    assert!(curvature_gap((100.0, 100.0), (50.0, 20.0)).unwrap() > 0.0);
    assert!(curvature_gap((10.0, 10.0), (11.0, 1.0)).is_err());
}

#[test]
fn direction_targets_on_the_axes() {
    assert_eq!(direction_target(0.0, 10.0).unwrap(), Site::new(10, 1));
    assert_eq!(
        direction_target(std::f64::consts::FRAC_PI_2, 10.0).unwrap(),
        Site::new(1, 10)
    );
    assert!(direction_target(-0.1, 10.0).is_err());
}

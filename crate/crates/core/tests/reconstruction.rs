use sectio::bodies::{ellipsoid, lp_ball, StarBody};
use sectio::measures::{
    grid_directions, reconstruct_from_sections, section_profile, Density, SectionProfile,
};
use sectio::{Error, GridSpec};

fn profile(body: &StarBody, f: &Density, grid: &sectio::SphereGrid, spec: GridSpec) -> SectionProfile {
    let directions = grid_directions(grid);
    let half: Vec<_> = directions.iter().step_by(2).cloned().collect();
    let hv = section_profile(body, f, &half, spec).unwrap().values;
    SectionProfile {
        body: body.label().into(),
        density: f.label().into(),
        directions,
        values: hv.iter().flat_map(|v| [*v, *v]).collect(),
    }
}

fn radial_error(body: &StarBody, f: &Density, res: usize, m: usize) -> f64 {
    let grid = GridSpec::jacobi(res).build(body.dim()).unwrap();
    let p = profile(body, f, &grid, GridSpec::jacobi(24));
    let rec = reconstruct_from_sections(&p, f, &grid, m).unwrap();
    grid.nodes()
        .zip(&rec.radial)
        .map(|(x, r)| (r / body.radial(x) - 1.0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn gaussian_ellipsoid_round_trip() {
    let e = ellipsoid(&[1.4, 0.9, 1.1]).unwrap();
    assert!(radial_error(&e, &Density::gaussian(), 24, 12) < 1e-3);
}

#[test]
fn lp4_lebesgue_round_trip() {
    assert!(radial_error(&lp_ball(3, 4.0).unwrap(), &Density::lebesgue(), 32, 16) < 1e-2);
}

#[test]
fn negative_transform_is_not_a_profile() {
    let f = Density::lebesgue();
    let grid = GridSpec::jacobi(8).build(3).unwrap();
    let mut p = profile(&lp_ball(3, 2.0).unwrap(), &f, &grid, GridSpec::jacobi(8));
    p.values.iter_mut().for_each(|v| *v = -*v);
    let err = reconstruct_from_sections(&p, &f, &grid, 4).unwrap_err();
    assert!(matches!(err, Error::NotASectionProfile { .. }), "{err}");
}

//! Members of the set-valued projection in the degenerate case `x0 = +-y0`.

use serde::{Deserialize, Serialize};

use crate::cross::{classify, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{complement_project, rank1_project, PairPoint, Vector};
use crate::sphere::{unit_sphere_1d, AngleLattice};

/// Lattice sizes beyond this are not searched for injective samples.
const MAX_LATTICE: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    /// Every lattice direction, duplicates included (`u` and `-u` give the same point).
    Grid,
    /// Only directions with `<u, x0> > 0`; returned points are pairwise distinct.
    Injective,
}

/// A materialized member; `u` is `None` for the base point `(0, y0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub u: Option<Vector>,
    pub point: PairPoint,
}

pub(crate) fn member_for_direction(x0: &Vector, y0: &Vector, u: &Vector) -> Result<PairPoint> {
    PairPoint::new(rank1_project(u, x0)?, complement_project(u, y0)?)
}

fn require_degenerate(x0: &Vector, y0: &Vector, tols: &Tolerances) -> Result<()> {
    let tag = classify(x0, y0, tols)?;
    if !tag.is_degenerate() {
        return Err(Error::NotDegenerate(tag));
    }
    Ok(())
}

/// `(0, y0) + (<u,x0>u, -<u,y0>u)` for a unit `u`.
pub fn degenerate_family(
    x0: &Vector,
    y0: &Vector,
    u: &Vector,
    tols: &Tolerances,
) -> Result<PairPoint> {
    require_degenerate(x0, y0, tols)?;
    member_for_direction(x0, y0, u)
}

/// The base point followed by up to `count - 1` members from sphere samples.
///
/// Grid mode always returns exactly `count` members. Injective mode may
/// return fewer when the sphere has fewer admissible directions (in `R`
/// there is only one).
pub fn family_enumerate(
    x0: &Vector,
    y0: &Vector,
    count: usize,
    mode: FamilyMode,
    tols: &Tolerances,
) -> Result<Vec<FamilyMember>> {
    require_degenerate(x0, y0, tols)?;
    if count == 0 {
        return Err(Error::InvalidArgument(
            "family count must be positive".into(),
        ));
    }
    let dim = x0.dim();
    let base = PairPoint::new(Vector::zeros(dim), y0.clone())?;
    let mut out = vec![FamilyMember {
        u: None,
        point: base,
    }];
    let wanted = count - 1;
    if wanted == 0 {
        return Ok(out);
    }

    match mode {
        FamilyMode::Grid => {
            let dirs: Vec<Vector> = if dim == 1 {
                unit_sphere_1d().into_iter().cycle().take(wanted).collect()
            } else {
                let lattice = AngleLattice::new(dim, per_angle_for(wanted, dim))?;
                lattice.iter().take(wanted).collect()
            };
            for u in dirs {
                let point = member_for_direction(x0, y0, &u)?;
                out.push(FamilyMember { u: Some(u), point });
            }
        }
        FamilyMode::Injective => {
            let scale = 1.0 + (x0.norm_sq() + y0.norm_sq()).sqrt();
            let positive = 1e-12 * x0.norm();
            let push_distinct = |u: Vector, out: &mut Vec<FamilyMember>| -> Result<()> {
                if crate::linalg::inner(&u, x0)? <= positive {
                    return Ok(());
                }
                let point = member_for_direction(x0, y0, &u)?;
                for m in out.iter() {
                    if m.point.dist(&point)? <= 1e-12 * scale {
                        return Ok(());
                    }
                }
                out.push(FamilyMember { u: Some(u), point });
                Ok(())
            };
            if dim == 1 {
                for u in unit_sphere_1d() {
                    push_distinct(u, &mut out)?;
                }
            } else {
                // Roughly half the lattice passes the sign filter.
                let mut per_angle = per_angle_for(2 * wanted, dim);
                'grow: loop {
                    let lattice = AngleLattice::new(dim, per_angle)?;
                    for u in lattice.iter() {
                        push_distinct(u, &mut out)?;
                        if out.len() > wanted {
                            break 'grow;
                        }
                    }
                    per_angle *= 2;
                    match AngleLattice::new(dim, per_angle)?.len() {
                        Some(n) if n <= MAX_LATTICE => {}
                        _ => break,
                    }
                }
            }
            out.truncate(count);
        }
    }
    Ok(out)
}

/// Smallest `m` with `m^(dim-1) >= n`.
fn per_angle_for(n: usize, dim: usize) -> usize {
    let exp = (dim - 1) as u32;
    let mut m = ((n as f64).powf(1.0 / exp as f64).floor() as usize).max(1);
    while m.checked_pow(exp).is_some_and(|p| p < n) {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::{membership, objective, CaseTag};

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn family_member_examples() {
        let t = Tolerances::default();
        let x0 = v(&[1.0, 1.0]);
        let p = degenerate_family(&x0, &x0, &v(&[1.0, 0.0]), &t).unwrap();
        assert_eq!(p, PairPoint::from_slices(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
        assert_eq!(objective(&p, &x0, &x0).unwrap(), 1.0);

        let one = v(&[1.0]);
        let p = degenerate_family(&one, &one, &one, &t).unwrap();
        assert_eq!(p, PairPoint::from_slices(&[1.0], &[0.0]).unwrap());
    }

    #[test]
    fn family_rejects_generic_input_and_bad_direction() {
        let t = Tolerances::default();
        let err = degenerate_family(&v(&[2.0]), &v(&[1.0]), &v(&[1.0]), &t).unwrap_err();
        assert!(matches!(err, Error::NotDegenerate(CaseTag::Generic)));
        let x0 = v(&[1.0, 1.0]);
        assert!(matches!(
            degenerate_family(&x0, &x0, &v(&[1.0, 1.0]), &t),
            Err(Error::NotUnit { .. })
        ));
        assert!(family_enumerate(&x0, &x0, 0, FamilyMode::Grid, &t).is_err());
    }

    #[test]
    fn enumerate_count_one_is_base() {
        let x0 = v(&[1.0, -2.0]);
        let y0 = x0.scale(-1.0);
        let fam = family_enumerate(&x0, &y0, 1, FamilyMode::Grid, &Tolerances::default()).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].u, None);
        assert_eq!(fam[0].point, PairPoint::from_parts(Vector::zeros(2), y0));
    }

    #[test]
    fn enumerate_injective_1d() {
        let x0 = v(&[1.5]);
        let fam =
            family_enumerate(&x0, &x0, 3, FamilyMode::Injective, &Tolerances::default()).unwrap();
        let pts: Vec<_> = fam.iter().map(|m| m.point.clone()).collect();
        assert_eq!(
            pts,
            vec![
                PairPoint::from_slices(&[0.0], &[1.5]).unwrap(),
                PairPoint::from_slices(&[1.5], &[0.0]).unwrap()
            ]
        );
        // Negative x0 keeps u = -1 instead.
        let x0 = v(&[-2.0]);
        let fam =
            family_enumerate(&x0, &x0, 3, FamilyMode::Injective, &Tolerances::default()).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam[1].u, Some(v(&[-1.0])));
    }

    #[test]
    fn enumerate_grid_2d() {
        let x0 = v(&[1.0, 1.0]);
        let fam = family_enumerate(&x0, &x0, 5, FamilyMode::Grid, &Tolerances::default()).unwrap();
        assert_eq!(fam.len(), 5);
        for m in &fam {
            assert!(membership(&m.point, 1e-15));
            assert!((objective(&m.point, &x0, &x0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn enumerate_injective_points_are_distinct() {
        let x0 = v(&[0.5, -1.0, 2.0]);
        let y0 = x0.scale(-1.0);
        let fam =
            family_enumerate(&x0, &y0, 40, FamilyMode::Injective, &Tolerances::default()).unwrap();
        assert_eq!(fam.len(), 40);
        for (i, a) in fam.iter().enumerate() {
            if let Some(u) = &a.u {
                assert!(crate::linalg::inner(u, &x0).unwrap() > 0.0);
            }
            for b in &fam[i + 1..] {
                assert!(a.point.dist(&b.point).unwrap() > 1e-9);
            }
        }
    }

    #[test]
    fn per_angle_is_minimal() {
        assert_eq!(per_angle_for(4, 2), 4);
        assert_eq!(per_angle_for(4, 3), 2);
        assert_eq!(per_angle_for(5, 3), 3);
        assert_eq!(per_angle_for(1, 4), 1);
        assert_eq!(per_angle_for(9, 3), 3);
    }
}

//! Arrangement polynomials built from a hyperplane table:
//! `Q_det = prod l_H^(e_H - 1)`, `Q(A~) = prod l_H^(e_H b_H)`,
//! `delta = prod_{b_H = n-1} l_H^(e_H)` and the character versions
//! `Q_chi = prod l_H^(a_H)`, `Q(A~_chi) = prod_{chi(s_H) = 1} l_H^(e_H b_H)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grp::{arrangement, Character, HyperplaneData, MatrixGroup};
use crate::mpoly::{LinearForm, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("no exponent a with {character}(s_H) = det(s_H)^-a for hyperplane {hyperplane}")]
    NoSolution {
        hyperplane: String,
        character: String,
    },
    #[error("s_H for hyperplane {0} is not an element of the group")]
    MissingReflection(String),
}

#[derive(Debug, Clone)]
pub struct ArrangementPolys {
    pub q_det: Polynomial,
    pub q_tilde: Polynomial,
    pub delta_max: Polynomial,
}

impl ArrangementPolys {
    /// `Q(A~) Q_det`, the target of the freeness criterion.
    pub fn solomon_target(&self) -> Polynomial {
        &self.q_tilde * &self.q_det
    }
}

fn product_of_powers<'a, I>(table: &[HyperplaneData], nvars: usize, factors: I) -> Polynomial
where
    I: IntoIterator<Item = (&'a LinearForm, u32)>,
{
    let field = table
        .first()
        .map(|h| h.form.field().clone())
        .expect("nonempty table when factors exist");
    factors
        .into_iter()
        .filter(|&(_, e)| e > 0)
        .fold(Polynomial::one(&field, nvars), |acc, (l, e)| {
            &acc * &l.to_polynomial().pow(e)
        })
}

/// Builds the three arrangement polynomials from the reflecting hyperplanes of `table`.
pub fn build_arrangement_polys(table: &[HyperplaneData], g: &MatrixGroup) -> ArrangementPolys {
    let n = g.dim();
    let one = Polynomial::one(g.field(), n);
    if table.is_empty() {
        return ArrangementPolys {
            q_det: one.clone(),
            q_tilde: one.clone(),
            delta_max: one,
        };
    }
    let arr: Vec<&HyperplaneData> = arrangement(table).collect();
    let q_det = product_of_powers(table, n, arr.iter().map(|h| (&h.form, h.e - 1)));
    let q_tilde = product_of_powers(table, n, arr.iter().map(|h| (&h.form, h.e * h.b as u32)));
    let delta_max = product_of_powers(
        table,
        n,
        arr.iter().filter(|h| h.b + 1 == n).map(|h| (&h.form, h.e)),
    );
    ArrangementPolys {
        q_det,
        q_tilde,
        delta_max,
    }
}

/// Convenience: table and polynomials for a group.
pub fn for_group(g: &MatrixGroup) -> (Vec<HyperplaneData>, ArrangementPolys) {
    let table = crate::grp::hyperplane_table(g);
    let polys = build_arrangement_polys(&table, g);
    (table, polys)
}

#[derive(Debug, Clone)]
pub struct ChiPolys {
    /// `(l_H, a_H)` for every reflecting hyperplane, in table order.
    pub exponents: Vec<(LinearForm, u32)>,
    pub q_chi: Polynomial,
    pub q_tilde_chi: Polynomial,
}

/// Smallest `a` in `[0, e_H)` with `chi(s_H) = det(s_H)^(-a)`, per hyperplane.
pub fn q_chi(
    g: &MatrixGroup,
    table: &[HyperplaneData],
    chi: &Character,
) -> Result<ChiPolys, ArrangementError> {
    let f = g.field();
    let n = g.dim();
    let mut exponents = Vec::new();
    let mut fixed = Vec::new();
    for h in arrangement(table) {
        let idx = g
            .index_of(&h.s)
            .ok_or_else(|| ArrangementError::MissingReflection(h.form.to_string()))?;
        let chi_s = chi.value(idx);
        let det_inv = g.det(idx).inv().expect("invertible");
        let a = (0..h.e)
            .find(|&a| det_inv.pow(a as i64).expect("unit") == chi_s)
            .ok_or_else(|| ArrangementError::NoSolution {
                hyperplane: h.form.to_string(),
                character: chi.name.clone(),
            })?;
        exponents.push((h.form.clone(), a));
        if chi_s.is_one() {
            fixed.push((&h.form, h.e * h.b as u32));
        }
    }
    if exponents.is_empty() {
        let one = Polynomial::one(f, n);
        return Ok(ChiPolys {
            exponents,
            q_chi: one.clone(),
            q_tilde_chi: one,
        });
    }
    let q_chi = product_of_powers(table, n, exponents.iter().map(|(l, a)| (l, *a)));
    let q_tilde_chi = product_of_powers(table, n, fixed);
    Ok(ChiPolys {
        exponents,
        q_chi,
        q_tilde_chi,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneEntry {
    #[serde(rename = "l_H")]
    pub l_h: Vec<u32>,
    #[serde(rename = "e_H")]
    pub e_h: u32,
    #[serde(rename = "b_H")]
    pub b_h: usize,
    pub orbit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degrees {
    pub q_det: u32,
    pub q_tilde: u32,
    pub delta: u32,
}

/// JSON report block for an arrangement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrangementReport {
    pub hyperplanes: Vec<HyperplaneEntry>,
    pub degrees: Degrees,
}

impl ArrangementReport {
    pub fn new(table: &[HyperplaneData], polys: &ArrangementPolys) -> Self {
        ArrangementReport {
            hyperplanes: arrangement(table)
                .map(|h| HyperplaneEntry {
                    l_h: h.form.raw().to_vec(),
                    e_h: h.e,
                    b_h: h.b,
                    orbit: h.orbit,
                })
                .collect(),
            degrees: Degrees {
                q_det: polys.q_det.degree().unwrap_or(0),
                q_tilde: polys.q_tilde.degree().unwrap_or(0),
                delta: polys.delta_max.degree().unwrap_or(0),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grp::tests::{f3, gl2_f3, u3_f3};
    use crate::grp::{act_on_polynomial, det_character, trivial_character, DEFAULT_CAP};
    use crate::linalg::Matrix;

    fn diag12() -> MatrixGroup {
        let f = f3();
        MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[0, 2]])],
            DEFAULT_CAP,
        )
        .unwrap()
    }

    fn assert_invariant(g: &MatrixGroup, p: &Polynomial, chi: &Character) {
        for m in g.generators() {
            let idx = g.index_of(m).unwrap();
            assert_eq!(act_on_polynomial(m, p).unwrap(), p.scale(&chi.value(idx)));
        }
    }

    #[test]
    fn gl2_degrees() {
        let g = gl2_f3();
        let (table, polys) = for_group(&g);
        assert_eq!(polys.q_det.degree(), Some(4));
        assert_eq!(polys.q_tilde.degree(), Some(8));
        assert_eq!(polys.delta_max.degree(), Some(8));
        // n - 1 = 1
        assert_eq!(polys.delta_max, polys.q_tilde);
        let prod = polys.solomon_target();
        assert_eq!(
            prod.exact_divide(&polys.q_det).unwrap(),
            Some(polys.q_tilde.clone())
        );
        let triv = trivial_character(&g);
        let det = det_character(&g);
        assert_invariant(&g, &polys.q_tilde, &triv);
        assert_invariant(&g, &polys.delta_max, &triv);
        assert_invariant(&g, &polys.q_det, &det);
        let report = ArrangementReport::new(&table, &polys);
        assert_eq!(report.hyperplanes.len(), 4);
        assert_eq!(
            report.degrees,
            Degrees {
                q_det: 4,
                q_tilde: 8,
                delta: 8
            }
        );
    }

    #[test]
    fn unipotent_and_diagonal_cases() {
        let (_, polys) = for_group(&u3_f3());
        assert!(polys.q_det.is_constant());
        assert_eq!(polys.q_det, Polynomial::one(polys.q_det.field(), 3));
        assert_eq!(polys.q_tilde.degree(), Some(5));
        // only z_1 has b_H = n - 1 = 2
        assert_eq!(polys.delta_max, Polynomial::var(&f3(), 3, 0));

        let g = diag12();
        let (_, polys) = for_group(&g);
        assert_eq!(polys.q_tilde, Polynomial::one(&f3(), 2));
        assert_eq!(polys.q_det, Polynomial::var(&f3(), 2, 1));
    }

    #[test]
    fn character_exponents() {
        let g = gl2_f3();
        let (table, polys) = for_group(&g);
        let triv = trivial_character(&g);
        let c = q_chi(&g, &table, &triv).unwrap();
        assert!(c.exponents.iter().all(|(_, a)| *a == 0));
        assert_eq!(c.q_chi, Polynomial::one(&f3(), 2));
        assert_eq!(c.q_tilde_chi, polys.q_tilde);

        let det = det_character(&g);
        let c = q_chi(&g, &table, &det.inverse()).unwrap();
        assert!(c.exponents.iter().all(|(_, a)| *a == 1));
        assert_eq!(c.q_chi.degree(), Some(4));
        assert_eq!(c.q_tilde_chi, Polynomial::one(&f3(), 2));
        assert_invariant(&g, &c.q_chi, &det.inverse());

        let c = q_chi(&g, &table, &det).unwrap();
        assert!(c.exponents.iter().all(|(_, a)| *a == 1));
        assert_eq!(c.q_chi, polys.q_det);
    }

    #[test]
    fn character_exponent_constant_on_orbits() {
        let g = gl2_f3();
        let (table, _) = for_group(&g);
        let det = det_character(&g);
        let c = q_chi(&g, &table, &det).unwrap();
        let arr: Vec<_> = arrangement(&table).collect();
        for (i, (_, a)) in c.exponents.iter().enumerate() {
            for (j, (_, b)) in c.exponents.iter().enumerate() {
                if arr[i].orbit == arr[j].orbit {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn unipotent_polys_are_invariant() {
        let g = u3_f3();
        let (_, polys) = for_group(&g);
        let triv = trivial_character(&g);
        assert_invariant(&g, &polys.q_tilde, &triv);
        assert_invariant(&g, &polys.delta_max, &triv);
    }
}

use super::{ComponentVector, ModelParameters};

/// The 6×5 stoichiometric matrix `S`: rows are the six reactions, columns
/// follow the component order (X_v, X_d, G, L, P).
///
/// ```text
/// 1. cell division       α_1,G G + X_v → 2 X_v + α_1,P P
/// 2. cell death                    X_v → X_d
/// 3. maintenance 1       α_3,G G + X_v → X_v + α_3,P P
/// 4. maintenance 2                 X_v → X_v + α_4,L L
/// 5. lactate production 1          X_v → X_v + α_5,L L
/// 6. lactate production 2          X_v → X_v + α_6,L L
/// ```
///
/// Division is the only reaction that changes the total cell count
/// (`X_v + X_d`): summing the two cell columns row-wise gives
/// `(1, 0, 0, 0, 0, 0)`. Death converts viable to dead cells one-for-one.
#[derive(Debug, Clone, PartialEq)]
pub struct Stoichiometry {
    matrix: [[f64; 5]; 6],
}

impl Stoichiometry {
    pub const NUM_REACTIONS: usize = 6;

    pub fn new(p: &ModelParameters) -> Self {
        Stoichiometry {
            matrix: [
                [1.0, 0.0, -p.alpha_1g, 0.0, p.alpha_1p],
                [-1.0, 1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, -p.alpha_3g, 0.0, p.alpha_3p],
                [0.0, 0.0, 0.0, p.alpha_4l, 0.0],
                [0.0, 0.0, 0.0, p.alpha_5l, 0.0],
                [0.0, 0.0, 0.0, p.alpha_6l, 0.0],
            ],
        }
    }

    /// Row-major matrix; `matrix()[reaction][component]`.
    pub fn matrix(&self) -> &[[f64; 5]; 6] {
        &self.matrix
    }

    /// Production rates `R = Sᵀ r` for reaction rates `r` [per-litre mass/min].
    pub fn production_rates(&self, r: &[f64; 6]) -> ComponentVector {
        let mut out = [0.0; 5];
        for (row, &rate) in self.matrix.iter().zip(r.iter()) {
            for (o, &s) in out.iter_mut().zip(row.iter()) {
                *o += s * rate;
            }
        }
        ComponentVector(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_count_balance_is_exact() {
        // S · [1, 1, 0, 0, 0]ᵀ = (1, 0, 0, 0, 0, 0)ᵀ: division adds exactly one
        // viable cell, every other reaction conserves the total cell count.
        let s = Stoichiometry::new(&ModelParameters::default());
        for (i, row) in s.matrix().iter().enumerate() {
            let cells = row[0] + row[1];
            let expected = if i == 0 { 1.0 } else { 0.0 };
            assert_eq!(cells, expected, "row {i}");
        }
    }

    #[test]
    fn production_rates_transpose_product() {
        let p = ModelParameters::default();
        let s = Stoichiometry::new(&p);
        let r = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
        let big_r = s.production_rates(&r);
        // Hand-expanded Sᵀ r.
        assert_eq!(big_r.viable_cells(), r[0] - r[1]);
        assert_eq!(big_r.dead_cells(), r[1]);
        assert_eq!(big_r.glucose(), -p.alpha_1g * r[0] - p.alpha_3g * r[2]);
        assert_eq!(big_r.lactate(), p.alpha_4l * r[3] + p.alpha_5l * r[4] + p.alpha_6l * r[5]);
        assert_eq!(big_r.product(), p.alpha_1p * r[0] + p.alpha_3p * r[2]);
    }

    #[test]
    fn cell_count_conservation_under_transpose() {
        let s = Stoichiometry::new(&ModelParameters::default());
        let r = [0.25, 1.5, 0.75, 0.1, 0.9, 0.3];
        let big_r = s.production_rates(&r);
        // (Sᵀ r)[X_v] + (Sᵀ r)[X_d] = r_1 exactly.
        assert_eq!(big_r.viable_cells() + big_r.dead_cells(), r[0]);
    }
}

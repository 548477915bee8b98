use serde::{Deserialize, Serialize};

/// The five tracked components, in the fixed order used by every vector and
/// by the columns of the stoichiometric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Viable cells `X_v` [10⁹ cells].
    ViableCells = 0,
    /// Dead cells `X_d` [10⁹ cells].
    DeadCells = 1,
    /// Glucose `G` [g].
    Glucose = 2,
    /// Lactate `L` [g].
    Lactate = 3,
    /// Product (mAb) `P` [g].
    Product = 4,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::ViableCells,
        Component::DeadCells,
        Component::Glucose,
        Component::Lactate,
        Component::Product,
    ];
}

/// Ordered quantity per component: masses (10⁹ cells, 10⁹ cells, g, g, g)
/// or the per-litre concentration variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentVector(pub [f64; 5]);

impl ComponentVector {
    pub const ZERO: ComponentVector = ComponentVector([0.0; 5]);

    pub fn new(xv: f64, xd: f64, g: f64, l: f64, p: f64) -> Self {
        ComponentVector([xv, xd, g, l, p])
    }

    pub fn viable_cells(&self) -> f64 {
        self.0[Component::ViableCells as usize]
    }

    pub fn dead_cells(&self) -> f64 {
        self.0[Component::DeadCells as usize]
    }

    pub fn glucose(&self) -> f64 {
        self.0[Component::Glucose as usize]
    }

    pub fn lactate(&self) -> f64 {
        self.0[Component::Lactate as usize]
    }

    pub fn product(&self) -> f64 {
        self.0[Component::Product as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<Component> for ComponentVector {
    type Output = f64;
    fn index(&self, c: Component) -> &f64 {
        &self.0[c as usize]
    }
}

impl std::ops::IndexMut<Component> for ComponentVector {
    fn index_mut(&mut self, c: Component) -> &mut f64 {
        &mut self.0[c as usize]
    }
}

/// Reactor state: liquid volume plus the component masses. Dimension 6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Reactor volume [L]; positive on every accepted trajectory.
    pub volume: f64,
    /// Component masses, ordered as [`Component::ALL`].
    pub masses: ComponentVector,
}

impl State {
    pub const DIM: usize = 6;

    pub fn new(volume: f64, masses: ComponentVector) -> Self {
        State { volume, masses }
    }

    /// Concentrations `c = m / V` [10⁹ cells/L or g/L].
    pub fn concentrations(&self) -> ComponentVector {
        let v = self.volume;
        ComponentVector(self.masses.0.map(|m| m / v))
    }

    pub fn to_array(&self) -> [f64; 6] {
        let m = self.masses.0;
        [self.volume, m[0], m[1], m[2], m[3], m[4]]
    }

    pub fn from_array(x: [f64; 6]) -> Self {
        State {
            volume: x[0],
            masses: ComponentVector([x[1], x[2], x[3], x[4], x[5]]),
        }
    }
}

/// Manipulated inputs: four flow rates and the culture temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Input {
    /// Water inlet flow `F_W` [L/min].
    pub f_water: f64,
    /// Glucose feed inlet flow `F_G` [L/min].
    pub f_glucose: f64,
    /// Perfusion outlet flow `F_per` [L/min] (filtered: retains cells and product).
    pub f_perfusion: f64,
    /// Sampling outlet flow `F_out` [L/min] (whole broth).
    pub f_out: f64,
    /// Culture temperature `T` [K].
    pub temperature: f64,
}

impl Input {
    pub const DIM: usize = 5;

    pub fn new(f_water: f64, f_glucose: f64, f_perfusion: f64, f_out: f64, temperature: f64) -> Self {
        Input {
            f_water,
            f_glucose,
            f_perfusion,
            f_out,
            temperature,
        }
    }

    /// All flows inactive at the given temperature.
    pub fn batch(temperature: f64) -> Self {
        Input::new(0.0, 0.0, 0.0, 0.0, temperature)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.f_water,
            self.f_glucose,
            self.f_perfusion,
            self.f_out,
            self.temperature,
        ]
    }

    pub fn from_array(u: [f64; 5]) -> Self {
        Input {
            f_water: u[0],
            f_glucose: u[1],
            f_perfusion: u[2],
            f_out: u[3],
            temperature: u[4],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_array_round_trip() {
        let x = State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0));
        assert_eq!(State::from_array(x.to_array()), x);
    }

    #[test]
    fn concentrations_divide_by_volume() {
        let x = State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0));
        let c = x.concentrations();
        assert!((c.viable_cells() - 0.7).abs() < 1e-12);
        assert!((c.glucose() - 34.18 / 5.65).abs() < 1e-12);
    }
}

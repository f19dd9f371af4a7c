//! Generic mixed-integer linear program container plus the fixed column
//! layout used by the one-day scheduling problem.
//!
//! The instance form is deliberately plain: dense objective, sparse rows,
//! explicit bounds per column. The solver consumes exactly this and
//! nothing else, so anything phrased this way can be solved.

use serde::Serialize;

use crate::core::NodeSide;

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelOp {
    Le,
    Eq,
    Ge,
}

/// One decision variable.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Whether the variable must take an integer value.
    pub integral: bool,
    /// Branching priority for integral columns. `None` marks integral
    /// columns the branch-and-bound must not branch on because their
    /// value is implied once the ranked ones are fixed; those are filled
    /// in by the completion step instead.
    pub branch_rank: Option<u8>,
}

impl Column {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Column {
            name: name.into(),
            lower,
            upper,
            integral: false,
            branch_rank: None,
        }
    }

    pub fn binary(name: impl Into<String>, rank: u8) -> Self {
        Column {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            integral: true,
            branch_rank: Some(rank),
        }
    }

    /// Binary column whose value follows from the ranked binaries.
    pub fn implied_binary(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            integral: true,
            branch_rank: None,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

/// One linear constraint: `terms · x  rel  rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub rel: RelOp,
    pub rhs: f64,
}

/// A maximization MILP: maximize `objective · x + objective_constant`
/// subject to the rows and column bounds.
#[derive(Debug, Clone)]
pub struct MilpInstance {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    /// Present when the instance came out of the day builder; carries
    /// what the solver needs to fill in the implied transit indicators.
    pub day: Option<DayMeta>,
}

impl MilpInstance {
    pub fn new(name: impl Into<String>) -> Self {
        MilpInstance {
            name: name.into(),
            columns: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            day: None,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_column(&mut self, column: Column, objective: f64) -> usize {
        self.columns.push(column);
        self.objective.push(objective);
        self.columns.len() - 1
    }

    /// Append a row. Repeated columns are merged into a single term and
    /// exact zeros dropped, so each column appears at most once per row.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        rel: RelOp,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.iter_mut().find(|&&mut (k, _)| k == j) {
                Some(&mut (_, ref mut acc)) => *acc += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            rel,
            rhs,
        });
        self.rows.len() - 1
    }

    /// Objective value of a full assignment, constant included.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.objective.iter().zip(x).map(|(c, v)| c * v).sum();
        dot + self.objective_constant
    }

    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Structural sanity: indices in range, bounds ordered, numbers
    /// finite where they must be. Returns the first problem found.
    pub fn check_shape(&self) -> Result<(), String> {
        if self.objective.len() != self.columns.len() {
            return Err(format!(
                "objective has {} entries for {} columns",
                self.objective.len(),
                self.columns.len()
            ));
        }
        for (j, col) in self.columns.iter().enumerate() {
            if col.lower.is_nan() || col.upper.is_nan() || col.lower > col.upper {
                return Err(format!(
                    "column {} ({}) has unusable bounds [{}, {}]",
                    j, col.name, col.lower, col.upper
                ));
            }
        }
        for c in &self.objective {
            if !c.is_finite() {
                return Err("non-finite objective coefficient".to_owned());
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(format!("row {} ({}) has non-finite rhs", i, row.name));
            }
            for &(j, a) in &row.terms {
                if j >= self.columns.len() {
                    return Err(format!(
                        "row {} ({}) references column {} of {}",
                        i,
                        row.name,
                        j,
                        self.columns.len()
                    ));
                }
                if !a.is_finite() {
                    return Err(format!(
                        "row {} ({}) has non-finite coefficient",
                        i, row.name
                    ));
                }
            }
        }
        Ok(())
    }
}

/// What each column of the day layout means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// MW drawn from the battery and sold at a node.
    DischargeMw(NodeSide),
    /// MW bought at a node and pushed into the battery.
    ChargeMw(NodeSide),
    /// MWh stored at the end of the step.
    EnergyMwh,
    /// Unit parked at a node for the whole step.
    AtNode(NodeSide),
    /// Unit on the road for the whole step.
    Traveling,
    /// Presence at the node begins this step.
    Arriving(NodeSide),
    /// Presence at the node ends this step.
    Departing(NodeSide),
    /// A journey starts this step, leaving from the node.
    TravelStart(NodeSide),
}

/// Column indexing for the day problem.
///
/// Continuous variables come first, step-major, five per step:
/// discharge A, discharge B, charge A, charge B, stored energy. The nine
/// binaries per step follow in one block, again step-major. For a
/// 96-step day that is 480 continuous and 864 binary columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub steps: usize,
}

pub const CONTINUOUS_PER_STEP: usize = 5;
pub const BINARY_PER_STEP: usize = 9;

impl VarLayout {
    pub fn new(steps: usize) -> Self {
        VarLayout { steps }
    }

    pub fn n_cols(&self) -> usize {
        (CONTINUOUS_PER_STEP + BINARY_PER_STEP) * self.steps
    }

    pub fn n_continuous(&self) -> usize {
        CONTINUOUS_PER_STEP * self.steps
    }

    pub fn n_binary(&self) -> usize {
        BINARY_PER_STEP * self.steps
    }

    pub fn col_discharge(&self, side: NodeSide, step: usize) -> usize {
        CONTINUOUS_PER_STEP * step + side.index()
    }

    pub fn col_charge(&self, side: NodeSide, step: usize) -> usize {
        CONTINUOUS_PER_STEP * step + 2 + side.index()
    }

    pub fn col_energy(&self, step: usize) -> usize {
        CONTINUOUS_PER_STEP * step + 4
    }

    fn binary_base(&self, step: usize) -> usize {
        self.n_continuous() + BINARY_PER_STEP * step
    }

    pub fn col_at_node(&self, side: NodeSide, step: usize) -> usize {
        self.binary_base(step) + side.index()
    }

    pub fn col_traveling(&self, step: usize) -> usize {
        self.binary_base(step) + 2
    }

    pub fn col_arriving(&self, side: NodeSide, step: usize) -> usize {
        self.binary_base(step) + 3 + side.index()
    }

    pub fn col_departing(&self, side: NodeSide, step: usize) -> usize {
        self.binary_base(step) + 5 + side.index()
    }

    pub fn col_travel_start(&self, side: NodeSide, step: usize) -> usize {
        self.binary_base(step) + 7 + side.index()
    }

    /// Inverse of the col_* accessors: meaning and 0-based step.
    pub fn kind(&self, col: usize) -> (VarKind, usize) {
        let nc = self.n_continuous();
        if col < nc {
            let step = col / CONTINUOUS_PER_STEP;
            let kind = match col % CONTINUOUS_PER_STEP {
                0 => VarKind::DischargeMw(NodeSide::A),
                1 => VarKind::DischargeMw(NodeSide::B),
                2 => VarKind::ChargeMw(NodeSide::A),
                3 => VarKind::ChargeMw(NodeSide::B),
                _ => VarKind::EnergyMwh,
            };
            (kind, step)
        } else {
            let rel = col - nc;
            let step = rel / BINARY_PER_STEP;
            let kind = match rel % BINARY_PER_STEP {
                0 => VarKind::AtNode(NodeSide::A),
                1 => VarKind::AtNode(NodeSide::B),
                2 => VarKind::Traveling,
                3 => VarKind::Arriving(NodeSide::A),
                4 => VarKind::Arriving(NodeSide::B),
                5 => VarKind::Departing(NodeSide::A),
                6 => VarKind::Departing(NodeSide::B),
                7 => VarKind::TravelStart(NodeSide::A),
                _ => VarKind::TravelStart(NodeSide::B),
            };
            (kind, step)
        }
    }

    /// Short unique column name, 1-based step in the suffix.
    pub fn col_name(&self, col: usize) -> String {
        let (kind, step) = self.kind(col);
        let s = step + 1;
        match kind {
            VarKind::DischargeMw(n) => format!("PD_{}_{:03}", n.label(), s),
            VarKind::ChargeMw(n) => format!("PC_{}_{:03}", n.label(), s),
            VarKind::EnergyMwh => format!("E_{s:03}"),
            VarKind::AtNode(n) => format!("W_{}_{:03}", n.label(), s),
            VarKind::Traveling => format!("G_{s:03}"),
            VarKind::Arriving(n) => format!("AR_{}_{:03}", n.label(), s),
            VarKind::Departing(n) => format!("DP_{}_{:03}", n.label(), s),
            VarKind::TravelStart(n) => format!("TS_{}_{:03}", n.label(), s),
        }
    }
}

/// Day-specific facts a solver needs beyond the generic MILP: the
/// layout and the starting position, so the implied transit indicators
/// can be reconstructed from integral presence/travel values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayMeta {
    pub layout: VarLayout,
    /// Node occupied during the step before the horizon, if any.
    pub initial_at_node: Option<NodeSide>,
    /// Whether the unit was on the road during that step.
    pub initial_traveling: bool,
    /// Best guess for the node a mid-journey unit departed from. Only
    /// consulted for journeys that started before the horizon.
    pub origin_hint: Option<NodeSide>,
}

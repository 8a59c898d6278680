//! A complete specification: world model, declared objects, spatial views,
//! standalone charts, requirement TSCs, and analysis settings.

use crate::chart::{BasicChart, RequirementTsc};
use crate::model::{CarParams, LaneState, WorldModel};
use crate::view::SpatialView;
use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDecl {
    pub name: String,
    pub type_name: String,
    /// Fixed lane geometry, when declared with arguments.
    pub fixed_lane: Option<LaneState>,
    /// Per-object override of the global vehicle geometry class.
    pub car_params: Option<CarParams>,
}

/// Analysis configuration overrides from the `analysis { ... }` block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisSettings {
    /// Fixed step size in seconds (sufficient mode).
    pub step: Option<BigRational>,
    /// Sufficient-mode unrolling depth.
    pub depth: Option<usize>,
    /// Number of heading intervals.
    pub intervals: Option<usize>,
    /// Per-query solver timeout in seconds.
    pub timeout: Option<BigRational>,
    /// Cap on the size of analyzed TSC subsets.
    pub max_subset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Specification {
    pub world: WorldModel,
    pub objects: Vec<ObjectDecl>,
    pub views: Vec<SpatialView>,
    pub charts: Vec<(String, BasicChart)>,
    pub tscs: Vec<RequirementTsc>,
    pub analysis: AnalysisSettings,
}

impl Specification {
    pub fn empty() -> Self {
        Specification {
            world: WorldModel::standard(),
            objects: Vec::new(),
            views: Vec::new(),
            charts: Vec::new(),
            tscs: Vec::new(),
            analysis: AnalysisSettings::default(),
        }
    }

    pub fn view(&self, name: &str) -> Option<&SpatialView> {
        self.views.iter().find(|v| v.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn chart(&self, name: &str) -> Option<&BasicChart> {
        self.charts.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn tsc(&self, name: &str) -> Option<&RequirementTsc> {
        self.tscs.iter().find(|t| t.name == name)
    }

    /// The closed-world object pool for quantifier expansion.
    pub fn pool(&self) -> Vec<(String, String)> {
        self.objects
            .iter()
            .map(|o| (o.name.clone(), o.type_name.clone()))
            .collect()
    }

    /// Vehicle geometry for an object (per-object override or global class).
    pub fn params_for(&self, object: &str) -> &CarParams {
        self.object(object)
            .and_then(|o| o.car_params.as_ref())
            .unwrap_or(&self.world.car_params)
    }

    pub fn type_of(&self, object: &str) -> Option<&str> {
        self.object(object).map(|o| o.type_name.as_str())
    }

    pub fn is_dynamic(&self, object: &str) -> bool {
        match self.type_of(object) {
            Some(t) => self.world.is_subtype(t, "MovingObject"),
            None => false,
        }
    }
}

//! Complementary homogeneous subgroups `G = M . H`, intrinsic graphs over
//! `M`, cone tests and the measures carried by a sampled graph.

mod c0;
mod fixture;
mod graph;
mod graph_measure;
mod split;

pub use c0::{c0_estimate, scale_to_norm, C0Estimate};
pub use fixture::GraphFixture;
pub use graph::{verify_cone, ConeReport, GraphGrid, GraphMap, IntrinsicGraph};
pub use graph_measure::{
    ahlfors_on_graph, ahlfors_profile, graph_measures, integrate_on_graph, loglog_slope, metric_spacing, AhlforsReport,
    GraphIntegral, GraphMeasures,
};
pub use split::{cone_contains, cone_margin, HomogeneousSplit};

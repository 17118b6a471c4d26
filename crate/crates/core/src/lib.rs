//! Desk-scale computational topology on the 2-sphere: decide whether a
//! punctured planar scene is homotopically at most 1-dimensional, tile its
//! good region by punctured Peano domains, build 1-dimensional spines, and
//! probe fundamental-group injectivity through the vertical-decomposition
//! quotient.

pub mod characterize;
pub mod dyadic;
pub mod quotient;
pub mod raster;
pub mod retractor;
pub mod scene;
pub mod sequences;
pub mod svg;
pub mod tiler;

pub use characterize::{
    condition1, condition2, homotopy_dimension_verdict, CheckVerdict, ConditionReport,
    DimensionVerdict, HomotopyDimension,
};
pub use dyadic::{Dyadic, DyadicPoint};
pub use quotient::{
    build_run_graph, cancellation_lamination, ideal_triangulation, injectivity_probe,
    loop_word_in_m, project_loop_and_word, CirclePt, Lamination, LoopWord, RunGraph,
};
pub use raster::{
    hausdorff_distance, label_components, probe_disks, Adjacency, Component, ComponentFamily,
    ProbeRect, Raster, RasterError,
};
pub use retractor::{build_spine, spine_union_dimension_check, Spine};
pub use scene::{builtin_scene, validate_scene, Scene, SceneName};
pub use sequences::{null_sequence_verdict, NullVerdict, Verdict};
pub use tiler::{run_stages, PeanoTiling};

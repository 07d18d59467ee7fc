//! Benchmark instances, manifest-driven runs and performance profiles.

pub mod generators;
pub mod manifest;
pub mod profile;

pub use generators::{
    desk_family, generate_example1, generate_random_allocation, generate_random_allocation_with,
    generate_strongly_convex, AllocationOptions, ProblemSource, DESK_SIZES, EXAMPLE1_SOLUTION,
};
pub use manifest::{instance_slug, run_command, BatchOutcome, ConfigOverrides, RunManifest, RunSummary};
pub use profile::{performance_profile, profile_curves, ProfileCurves, ProfileTable};

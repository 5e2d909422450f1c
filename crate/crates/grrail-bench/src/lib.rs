//! Shared fixtures for the pipeline benchmarks.

use grrail_core::{cohort_spec, generate_phantom, PhantomClass, RoiMask, VoxelGrid};

/// A textured heterogeneous phantom at the given grid edge.
pub fn bench_phantom(size: usize, seed: u64) -> (VoxelGrid, RoiMask) {
    let spec = cohort_spec(PhantomClass::Heterogeneous, seed as usize, size, 1234);
    let (grid, mask, _) = generate_phantom(&spec).expect("bench phantom");
    (grid, mask)
}

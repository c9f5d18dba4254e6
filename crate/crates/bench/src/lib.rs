//! Shared fixtures for the pipeline benchmarks.

use ebicr::model::synthesize_dataset;
use ebicr::rng::{purpose, substream};
use ebicr::{BlockStructure, BlockSupport, Dataset};

/// One synthetic instance at the default experiment geometry
/// (N = 150, p = 1000, L = 5, L_B = 10, K_B = 4) at the given SNR.
pub fn default_instance(snr_db: f64, seed: u64) -> Dataset {
    let structure = BlockStructure::new(150, 1000, 5, 10).expect("fixture geometry is valid");
    let support = BlockSupport::first_blocks(4, structure.p_b()).expect("4 blocks fit in p_B");
    let mut rng = substream(seed, purpose::DATASET, 0, 0);
    synthesize_dataset(&structure, &support, snr_db, &mut rng).expect("fixture synthesis")
}

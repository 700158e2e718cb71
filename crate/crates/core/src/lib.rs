//! Functional-group aware molecule handling: parsing and canonicalization,
//! fingerprints, priority-driven group decomposition, visual anchors,
//! directional template matching, reaction layouts, synthetic annotation
//! generation and entity-name activation prompts.

pub mod activation;
pub mod anchor;
pub mod coco;
pub mod datagen;
pub mod dvm;
pub mod fgdict;
pub mod fingerprint;
pub mod geometry;
pub mod molgraph;
pub mod reaction;

pub use geometry::{BBox, Point};
pub use molgraph::{
    canonical_smiles, generate_2d_coords, parse_molfile, parse_smiles, sanitize, Atom, Bond,
    BondOrder, Element, MolError, MolecularGraph,
};

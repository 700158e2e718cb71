//! Shared inputs for the benchmarks.

/// Drug-like molecules of increasing size.
pub const MOLECULES: &[&str] = &[
    "CCO",
    "CC(=O)Nc1ccc(O)cc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1CCC[C@H]1c1cccnc1",
    "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1",
    "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
    "O=C(O)CC(O)(CC(=O)O)C(=O)O",
    "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21",
    "CC(C)NCC(O)COc1cccc2ccccc12",
    "COc1ccc2[nH]cc(CCNC(C)=O)c2c1",
];

pub const SUZUKI: &str =
    "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1.OB(O)c1ccccc1>>COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1\tPd(OAc)2, PPh3, TBAB / Toluene, H2O";

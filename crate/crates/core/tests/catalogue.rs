mod support;

use fetqc_core::iqm::catalogue::{Family, CATALOGUE_VERSION};
use fetqc_core::{build_catalogue, CatalogueConfig};
use support::criteria;

#[test]
fn contract_holds_on_degenerate_inputs() {
    let detail = criteria::catalogue_contract(200, 0xf022).unwrap_or_else(|e| panic!("{e}"));
    eprintln!("{detail}");
}

#[test]
fn manifest_lists_every_iqm_once() {
    let cat = build_catalogue(&CatalogueConfig::default()).unwrap();
    let manifest = cat.to_manifest();
    assert!(manifest.starts_with(&format!("# {CATALOGUE_VERSION}\n")));
    assert_eq!(manifest.lines().count(), 2 + 166);
    let counts = [Family::Intensity, Family::Mask, Family::Seg, Family::Metadata, Family::DeepLearning].map(|f| cat.family_count(f));
    assert_eq!(counts, [60, 9, 86, 5, 6]);
}

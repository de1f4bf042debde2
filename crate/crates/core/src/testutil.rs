use crate::keymodel::{CompositeKey, ValueWidth};

/// The seven-key bill-of-materials example plus a second reference for the
/// duplicated battery key. References: k1..k7 are 1..7, the duplicate is 8.
pub(crate) fn bom_keys() -> Vec<CompositeKey> {
    let rows: [(&str, u64, u64); 8] = [
        ("/bom/item/canoe", 69200, 1),
        ("/bom/item/carabiner", 241, 2),
        ("/bom/item/car/battery", 250714, 3),
        ("/bom/item/car/battery", 250714, 8),
        ("/bom/item/car/battery", 250800, 4),
        ("/bom/item/car/belt", 2890, 5),
        ("/bom/item/car/brake", 3266, 6),
        ("/bom/item/car/bumper", 2700, 7),
    ];
    rows.iter().map(|&(p, v, r)| CompositeKey::parse(p, v, ValueWidth::W4, r).unwrap()).collect()
}

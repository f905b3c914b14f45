use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The seven impact categories, in canonical wire order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Agriculture,
    Economy,
    Fire,
    PlantsWildlife,
    ReliefResponseRestrictions,
    SocietyPublicHealth,
    WaterSupplyQuality,
}

impl Category {
    pub const COUNT: usize = 7;

    pub const ALL: [Category; 7] = [
        Category::Agriculture,
        Category::Economy,
        Category::Fire,
        Category::PlantsWildlife,
        Category::ReliefResponseRestrictions,
        Category::SocietyPublicHealth,
        Category::WaterSupplyQuality,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Agriculture => "agriculture",
            Category::Economy => "economy",
            Category::Fire => "fire",
            Category::PlantsWildlife => "plants_wildlife",
            Category::ReliefResponseRestrictions => "relief_response_restrictions",
            Category::SocietyPublicHealth => "society_public_health",
            Category::WaterSupplyQuality => "water_supply_quality",
        }
    }

    /// Human-readable title as used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Category::Agriculture => "Agriculture",
            Category::Economy => "Economy",
            Category::Fire => "Fire",
            Category::PlantsWildlife => "Plants & Wildlife",
            Category::ReliefResponseRestrictions => "Relief, Response & Restrictions",
            Category::SocietyPublicHealth => "Society & Public Health",
            Category::WaterSupplyQuality => "Water Supply & Quality",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// The nine source categories before aggregation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RawCategory {
    Agriculture,
    Energy,
    PlantsWildlife,
    SocietyPublicHealth,
    WaterSupplyQuality,
    BusinessIndustry,
    Fire,
    ReliefResponseRestrictions,
    TourismRecreation,
}

impl RawCategory {
    pub const ALL: [RawCategory; 9] = [
        RawCategory::Agriculture,
        RawCategory::Energy,
        RawCategory::PlantsWildlife,
        RawCategory::SocietyPublicHealth,
        RawCategory::WaterSupplyQuality,
        RawCategory::BusinessIndustry,
        RawCategory::Fire,
        RawCategory::ReliefResponseRestrictions,
        RawCategory::TourismRecreation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RawCategory::Agriculture => "agriculture",
            RawCategory::Energy => "energy",
            RawCategory::PlantsWildlife => "plants_wildlife",
            RawCategory::SocietyPublicHealth => "society_public_health",
            RawCategory::WaterSupplyQuality => "water_supply_quality",
            RawCategory::BusinessIndustry => "business_industry",
            RawCategory::Fire => "fire",
            RawCategory::ReliefResponseRestrictions => "relief_response_restrictions",
            RawCategory::TourismRecreation => "tourism_recreation",
        }
    }

    /// Target category after folding the economic classes together.
    pub fn aggregate(self) -> Category {
        match self {
            RawCategory::Agriculture => Category::Agriculture,
            RawCategory::Energy | RawCategory::BusinessIndustry | RawCategory::TourismRecreation => Category::Economy,
            RawCategory::PlantsWildlife => Category::PlantsWildlife,
            RawCategory::SocietyPublicHealth => Category::SocietyPublicHealth,
            RawCategory::WaterSupplyQuality => Category::WaterSupplyQuality,
            RawCategory::Fire => Category::Fire,
            RawCategory::ReliefResponseRestrictions => Category::ReliefResponseRestrictions,
        }
    }
}

/// Binary impact vector over [`Category::ALL`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelVector(pub [bool; 7]);

impl LabelVector {
    pub const EMPTY: LabelVector = LabelVector([false; 7]);

    pub fn from_bits(bits: [u8; 7]) -> Self {
        LabelVector(bits.map(|b| b != 0))
    }

    pub fn from_categories(cats: impl IntoIterator<Item = Category>) -> Self {
        let mut v = LabelVector::EMPTY;
        for c in cats {
            v[c] = true;
        }
        v
    }

    pub fn bits(&self) -> [u8; 7] {
        self.0.map(u8::from)
    }

    pub fn get(&self, c: Category) -> bool {
        self.0[c.index()]
    }

    pub fn set(&mut self, c: Category, value: bool) {
        self.0[c.index()] = value;
    }

    pub fn positives(&self) -> impl Iterator<Item = Category> + '_ {
        Category::ALL.into_iter().filter(|c| self.get(*c))
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn union(&self, other: &LabelVector) -> LabelVector {
        let mut out = *self;
        for (o, b) in out.0.iter_mut().zip(other.0) {
            *o |= b;
        }
        out
    }
}

impl Index<Category> for LabelVector {
    type Output = bool;

    fn index(&self, c: Category) -> &bool {
        &self.0[c.index()]
    }
}

impl IndexMut<Category> for LabelVector {
    fn index_mut(&mut self, c: Category) -> &mut bool {
        &mut self.0[c.index()]
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.positives().map(Category::name).collect();
        if names.is_empty() {
            f.write_str("(none)")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

/// Binary vector over the nine source categories, order of [`RawCategory::ALL`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RawLabelVector9(pub [bool; 9]);

impl RawLabelVector9 {
    pub fn get(&self, c: RawCategory) -> bool {
        self.0[RawCategory::ALL.iter().position(|r| *r == c).expect("listed")]
    }
}

/// Folds energy, business & industry and tourism & recreation into economy;
/// the other six classes carry over unchanged.
pub fn aggregate_labels(raw: &RawLabelVector9) -> LabelVector {
    let mut out = LabelVector::EMPTY;
    for (rc, bit) in RawCategory::ALL.into_iter().zip(raw.0) {
        if bit {
            out[rc.aggregate()] = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(bits: [u8; 9]) -> RawLabelVector9 {
        RawLabelVector9(bits.map(|b| b != 0))
    }

    #[test]
    fn economy_folds_three_classes() {
        // order: agri, energy, plants, society, water, business, fire, relief, tourism
        let r = raw([0, 1, 0, 0, 0, 0, 1, 0, 1]);
        let v = aggregate_labels(&r);
        assert_eq!(v, LabelVector::from_categories([Category::Economy, Category::Fire]));
    }

    #[test]
    fn zeros_and_ones() {
        assert_eq!(aggregate_labels(&raw([0; 9])), LabelVector::EMPTY);
        assert_eq!(aggregate_labels(&raw([1; 9])), LabelVector([true; 7]));
    }

    #[test]
    fn names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
        }
        assert!("floods".parse::<Category>().is_err());
        let names: Vec<_> = RawCategory::ALL.iter().map(|c| c.name()).collect();
        assert_eq!(
            names,
            [
                "agriculture",
                "energy",
                "plants_wildlife",
                "society_public_health",
                "water_supply_quality",
                "business_industry",
                "fire",
                "relief_response_restrictions",
                "tourism_recreation"
            ]
        );
    }

    #[test]
    fn surjective() {
        let mut seen = std::collections::HashSet::new();
        for m in 0u32..512 {
            let r = RawLabelVector9(std::array::from_fn(|i| m >> i & 1 == 1));
            seen.insert(aggregate_labels(&r));
        }
        assert_eq!(seen.len(), 128);
    }

    proptest! {
        #[test]
        fn monotone(bits in proptest::array::uniform9(any::<bool>()), flip in 0usize..9) {
            let before = aggregate_labels(&RawLabelVector9(bits));
            let mut up = bits;
            up[flip] = true;
            let after = aggregate_labels(&RawLabelVector9(up));
            for c in Category::ALL {
                prop_assert!(!before[c] || after[c]);
            }
        }
    }
}

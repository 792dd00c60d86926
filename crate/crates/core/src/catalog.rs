//! Built-in field definitions.

use crate::numfield::NumberField;

macro_rules! builtin {
    ($($(#[$doc:meta])* $fn:ident => $file:literal),* $(,)?) => {
        $(
            $(#[$doc])*
            pub fn $fn() -> NumberField {
                NumberField::from_field_file(include_str!(concat!("../fields/", $file)), 128)
                    .expect("built-in field data are valid")
            }
        )*

        /// Names accepted by [`by_name`].
        pub const NAMES: &[&str] = &[$(stringify!($fn)),*];

        /// Built-in field by short name.
        pub fn by_name(name: &str) -> Option<NumberField> {
            match name {
                $(stringify!($fn) => Some($fn()),)*
                _ => None,
            }
        }

        /// Raw text of a built-in field file.
        pub fn source(name: &str) -> Option<&'static str> {
            match name {
                $(stringify!($fn) => Some(include_str!(concat!("../fields/", $file))),)*
                _ => None,
            }
        }
    };
}

builtin! {
    /// `Q(√2)`, fundamental unit `1 + √2`.
    qsqrt2 => "qsqrt2.field",
    /// `Q(i)`, unit rank zero.
    qi => "qi.field",
    /// `Q(√5)` with integral basis `{1, (1+√5)/2}`.
    qsqrt5 => "qsqrt5.field",
    /// Fifth cyclotomic field.
    qzeta5 => "qzeta5.field",
    /// `Q(ζ7 + ζ7⁻¹)`, totally real cubic.
    qzeta7plus => "qzeta7plus.field",
    /// Seventh cyclotomic field, three complex places.
    qzeta7 => "qzeta7.field",
    /// `Q(√2, √3)` generated by `√2 + √3`.
    qsqrt2sqrt3 => "qsqrt2sqrt3.field",
    /// `Q(α)` with `α⁴ − 2α³ + α² − 2α + 1 = 0`: two real places, one complex.
    benoist => "benoist.field",
}

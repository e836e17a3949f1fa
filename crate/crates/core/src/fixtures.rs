//! Bundled example agents and models.

/// Car inspection agent specs with 1 to 4 inspected parts.
pub const CAR_INSPECTION: [&str; 4] = [
    include_str!("../fixtures/car_inspection_1.toml"),
    include_str!("../fixtures/car_inspection_2.toml"),
    include_str!("../fixtures/car_inspection_3.toml"),
    include_str!("../fixtures/car_inspection_4.toml"),
];

/// Hand-written reference PDDL for the 4-part car inspection agent.
pub const CAR_INSPECTION_DOMAIN: &str = include_str!("../fixtures/car_inspection_domain.pddl");
pub const CAR_INSPECTION_PROBLEM: &str = include_str!("../fixtures/car_inspection_problem.pddl");

pub const TRIP_BOOKING: &str = include_str!("../fixtures/trip_booking.toml");

/// Single-action domain with a three-level nested effect.
pub const BOOK_HOTEL: &str = include_str!("../fixtures/book_hotel.pddl");

/// Spec text for the car inspection agent with `parts` parts (1..=4).
pub fn car_inspection(parts: usize) -> &'static str {
    CAR_INSPECTION[parts.clamp(1, 4) - 1]
}

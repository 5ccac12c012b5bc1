pub mod curve;
pub mod realize;
pub mod trajectory;
pub mod verify;

pub mod chain;
pub mod constructions;
pub mod corpus;
pub mod doc;
pub mod k0;
pub mod linalg;
pub mod quadratic;
pub mod ranicki;
pub mod report;
pub mod ring;

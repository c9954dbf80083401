pub mod dataset;
pub mod eda;
pub mod linear;
pub mod metrics;
pub mod imaging;
pub mod cnn;
pub mod synth;
pub mod corpus;
pub mod pipeline;
pub mod charts;

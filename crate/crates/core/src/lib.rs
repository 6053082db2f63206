pub mod circuit;
pub mod cli;
pub mod cxc;
pub mod cyclic;
pub mod decoder;
pub mod estimate;
pub mod frame;
pub mod gf2;
pub mod noise;

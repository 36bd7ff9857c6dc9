pub mod store_model;

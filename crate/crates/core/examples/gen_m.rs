use planar_homotopy_core::scene::sierpinski_carpet_raster;
fn main() {
    let m = sierpinski_carpet_raster(2, 7);
    std::fs::write("/tmp/m.phr", m.to_text()).unwrap();
}

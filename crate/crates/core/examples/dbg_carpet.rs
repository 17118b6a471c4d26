use planar_homotopy_core::raster::{label_window_components, probe_disks, diameter_of_cells, Adjacency};
use planar_homotopy_core::scene::sierpinski_carpet_raster;

fn main() {
    let ms: Vec<_> = (5..=7u8).map(|k| sierpinski_carpet_raster(2, k)).collect();
    let probes = probe_disks(0, 3);
    for probe in &probes {
        let mut fams = Vec::new();
        for m in &ms {
            let window = probe.cell_range(m.resolution());
            let comps = label_window_components(window, |c, r| !m.get(c, r), Adjacency::Eight);
            let diams: Vec<f64> = comps.iter().map(|cells| diameter_of_cells(cells, m.side()).unwrap_or(0.0)).collect();
            fams.push(diams);
        }
        // counts at eps = 1/2, 1/4, 1/8 with slack
        for eps in [0.5, 0.25, 0.125] {
            let counts: Vec<usize> = fams.iter().zip([2.0/32.0, 2.0/64.0, 2.0/128.0]).map(|(f, s)| f.iter().filter(|&&d| d >= eps - s).count()).collect();
            if counts[1] != counts[2] {
                println!("probe={probe} eps={eps} counts={counts:?}");
                println!("  k6 diams: {:?}", fams[1].iter().map(|d| (d*1000.0) as i64).collect::<Vec<_>>());
                println!("  k7 diams: {:?}", fams[2].iter().map(|d| (d*1000.0) as i64).collect::<Vec<_>>());
            }
        }
    }
}

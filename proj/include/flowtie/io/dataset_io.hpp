#ifndef FLOWTIE_IO_DATASET_IO_HPP
#define FLOWTIE_IO_DATASET_IO_HPP

#include <string>

#include "flowtie/io/container.hpp"
#include "flowtie/microscope.hpp"

namespace flowtie::io {

// One manifest.json plus named tensors (i_minus, i_zero, i_plus, phase_gt,
// vfield_gt, proj_phase_gt) in the given directory.
void save_dataset(const FourDDataset& ds, const std::string& dir);
FourDDataset load_dataset(const std::string& dir);

}  // namespace flowtie::io

#endif

#pragma once

#include <memory>

#include "advrecon/core/container.hpp"
#include "advrecon/nets/classifier.hpp"
#include "advrecon/nets/recon_net.hpp"

namespace advrecon::nets {

// Metadata holds the manifest {format, version, kind, iterations,
// lambda_init, share_enhancer, seed, levels, channels, alpha, m, N}; entries
// are "tikhonov" plus every parameter under "param/<name>".
Container net_to_container(const ReconNet& net);
// The operator must match the manifest dimensions; throws FormatError otherwise.
ReconNet net_from_container(const Container& c, std::shared_ptr<const operators::DenseMatrix> a);

Container classifier_to_container(const Classifier& clf);
Classifier classifier_from_container(const Container& c);

}  // namespace advrecon::nets

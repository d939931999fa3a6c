#pragma once

// Community detection in multiplex networks by spectrally truncated MBO
// iterations on two gradient flows of multiplex modularity.

#include "mxcd/network.hpp"
#include "mxcd/io.hpp"
#include "mxcd/operators.hpp"
#include "mxcd/lanczos.hpp"
#include "mxcd/basis_io.hpp"
#include "mxcd/metrics.hpp"
#include "mxcd/oracle.hpp"
#include "mxcd/mbo.hpp"

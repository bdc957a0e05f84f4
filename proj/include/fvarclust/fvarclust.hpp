#pragma once

#include "fvarclust/core.hpp"
#include "fvarclust/dictionary.hpp"
#include "fvarclust/error.hpp"
#include "fvarclust/evaluation.hpp"
#include "fvarclust/gram.hpp"
#include "fvarclust/io.hpp"
#include "fvarclust/kernels.hpp"
#include "fvarclust/nnls.hpp"
#include "fvarclust/random.hpp"
#include "fvarclust/sweep.hpp"
#include "fvarclust/synthetic.hpp"

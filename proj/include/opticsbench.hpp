#pragma once

// Umbrella header; image_io.hpp and corruptor.hpp need OpenCV (link opticsbench::io).

#include "opticsbench/augmentor.hpp"
#include "opticsbench/bench_score.hpp"
#include "opticsbench/convolution.hpp"
#include "opticsbench/corruptor.hpp"
#include "opticsbench/csv.hpp"
#include "opticsbench/error.hpp"
#include "opticsbench/fft.hpp"
#include "opticsbench/image.hpp"
#include "opticsbench/image_io.hpp"
#include "opticsbench/kernel.hpp"
#include "opticsbench/kernel_io.hpp"
#include "opticsbench/matcher.hpp"
#include "opticsbench/parallel.hpp"
#include "opticsbench/pupil_psf.hpp"
#include "opticsbench/quality_metrics.hpp"
#include "opticsbench/rng.hpp"
#include "opticsbench/zernike.hpp"

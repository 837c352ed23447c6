#pragma once

#include "boxes.hpp"
#include "core.hpp"
#include "experiment.hpp"
#include "fields.hpp"
#include "inversion.hpp"
#include "io.hpp"
#include "plt.hpp"
#include "polynomial.hpp"
#include "rng.hpp"
#include "sample_path.hpp"
#include "sdesim.hpp"
#include "sigcore.hpp"
#include "stratint.hpp"
#include "trajectory.hpp"

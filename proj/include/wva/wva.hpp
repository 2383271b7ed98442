#pragma once

#include "wva/dephasing.hpp"
#include "wva/errors.hpp"
#include "wva/noise_snr.hpp"
#include "wva/numerics.hpp"
#include "wva/postselect.hpp"
#include "wva/spectral_core.hpp"

#pragma once

#include "vtrans/bisim.hpp"
#include "vtrans/encodings.hpp"
#include "vtrans/error.hpp"
#include "vtrans/finite.hpp"
#include "vtrans/json_io.hpp"
#include "vtrans/pi.hpp"
#include "vtrans/pi_semantics.hpp"
#include "vtrans/property_suite.hpp"
#include "vtrans/term.hpp"
#include "vtrans/translation.hpp"

#pragma once

#include "capwhitham/depression.hpp"
#include "capwhitham/dispersion.hpp"
#include "capwhitham/error.hpp"
#include "capwhitham/fit.hpp"
#include "capwhitham/io.hpp"
#include "capwhitham/kdv_core.hpp"
#include "capwhitham/linear_solve.hpp"
#include "capwhitham/modstab.hpp"
#include "capwhitham/nanopteron.hpp"
#include "capwhitham/periodic_family.hpp"
#include "capwhitham/profile_equation.hpp"
#include "capwhitham/spectral_field.hpp"
#include "capwhitham/verify.hpp"

// Copyright 2026 The Fourier Accountant Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef FOURIER_ACCOUNTANT_HPP_
#define FOURIER_ACCOUNTANT_HPP_

#include "fourier_accountant/accountant.hpp"
#include "fourier_accountant/discretization.hpp"
#include "fourier_accountant/error_bounds.hpp"
#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/fft.hpp"
#include "fourier_accountant/mechanisms.hpp"
#include "fourier_accountant/oracle.hpp"
#include "fourier_accountant/root_finding.hpp"
#include "fourier_accountant/spectral.hpp"

#endif  // FOURIER_ACCOUNTANT_HPP_

/*
 * Copyright 2026 The Forage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <span>

namespace forage::stats {

double mean(std::span<const double> xs);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> xs);

// Two-sided critical value t_{1 - alpha/2, df}.
double t_critical(double df, double alpha = 0.05);

// Two-sided p-value of a t statistic.
double t_two_sided_p(double t, double df);

// Half-width of the Student-t confidence interval for the mean; 0 when
// fewer than two values.
double ci_half_width(std::span<const double> xs, double alpha = 0.05);

}  // namespace forage::stats

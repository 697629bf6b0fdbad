#include <stdio.h>
#include "bestarm.h"
int main(void){
  BestarmInstance *h = NULL;
  if (bestarm_hard_instance_new(10, 0.1, -1, &h) != BESTARM_STATUS_OK) return 1;
  size_t kept[4]; BestarmOutcome o;
  BestarmStatus s = bestarm_pac_bar(h, 0.1, 0.2, 4, 1, 0, kept, 4, &o);
  printf("%d %zu %llu %zu\n", s, o.retained_len, (unsigned long long)o.samples_used, kept[0]);
  double d; bestarm_bernoulli_kl(0.5, 0.7, &d); printf("%.12f\n", d);
  s = bestarm_instance_new(NULL, 3, &h); printf("%d %s\n", s, bestarm_last_error());
  bestarm_instance_free(h);
  return 0;
}

/* Constructed scan pair 1: sentinel walk vs bounded walk. */

int32 probe_levels(int32 *levels)
{
    int32 j;
    int32 c;
    for (j = 0; levels[j] >= 0; j++) {
        c = levels[j];
    }
    return c;
}

void sum_window(int32 *window, int32 span)
{
    int32 i;
    int32 v;
    for (i = 0; i < span; i++) {
        v = window[i];
    }
}

/* Constructed scan pair 2: sentinel walk vs bounded walk. */

int32 scan_codes(int32 *codes)
{
    int32 j;
    int32 c;
    for (j = 0; codes[j] >= 0; j++) {
        c = codes[j];
        j = j + 1;
        j = j + 2;
        j = j + 3;
    }
    return c;
}

void count_hits(int32 *hits, int32 total)
{
    int32 i;
    int32 v;
    for (i = 0; i < total; i++) {
        v = hits[i];
        i = i + 1;
        i = i + 2;
        i = i + 3;
    }
}

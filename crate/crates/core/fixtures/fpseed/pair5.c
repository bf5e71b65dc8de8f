/* Constructed scan pair 5: sentinel walk vs bounded walk. */

int32 trace_tags(int32 *tags)
{
    int32 j;
    int32 c;
    for (j = 0; tags[j] >= 0; j++) {
        c = tags[j];
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
    }
    return c;
}

void drain_queue(int32 *queue, int32 cap)
{
    int32 i;
    int32 v;
    for (i = 0; i < cap; i++) {
        v = queue[i];
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
    }
}
